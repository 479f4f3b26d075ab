"""Command-line interface: one ``resgan`` group, one module per workflow."""
import click

from resgan import create_lab


@click.group()
@click.option('--env', type=click.Choice(['development', 'production', 'testing']), default=None,
              help='Settings preset (defaults to $RESGAN_ENV or development).')
@click.option('--log-level', type=click.Choice(['DEBUG', 'INFO', 'WARNING', 'ERROR'], case_sensitive=False),
              default=None)
@click.pass_context
def cli(ctx, env, log_level):
    """Resembled GAN lab."""
    ctx.obj = create_lab(env, log_level=log_level)


def register_commands(group):
    """Attach every command module to ``group``."""
    from resgan.cli.data_commands import make_data
    from resgan.cli.evaluate_commands import evaluate
    from resgan.cli.feature_commands import pretrain_ae
    from resgan.cli.inference_commands import interpolate, reconstruct, sample
    from resgan.cli.train_commands import train, train_mapper

    for command in (make_data, pretrain_ae, train, train_mapper, sample, interpolate, reconstruct, evaluate):
        group.add_command(command)
    return group


register_commands(cli)
