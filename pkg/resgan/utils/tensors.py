"""Conversions between NHWC numpy images and NCHW torch tensors."""
import numpy as np
import torch


def images_to_tensor(images, device=None, dtype=torch.float32):
    """N x H x W x C array -> N x C x H x W tensor."""
    array = np.ascontiguousarray(np.asarray(images).transpose(0, 3, 1, 2))
    return torch.as_tensor(array, dtype=dtype, device=device)


def tensor_to_images(tensor):
    """N x C x H x W tensor -> N x H x W x C float32 array."""
    return np.ascontiguousarray(tensor.detach().cpu().permute(0, 2, 3, 1).numpy().astype(np.float32))


def module_device(module):
    """Device of a module's first parameter (cpu for parameterless modules)."""
    for parameter in module.parameters():
        return parameter.device
    return torch.device('cpu')


def module_dtype(module):
    for parameter in module.parameters():
        return parameter.dtype
    return torch.float32
