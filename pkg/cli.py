"""CLI for pairlab."""

import logging
import sys
from contextlib import contextmanager
from pathlib import Path

import click
import structlog

from config import __version__, get_config
from errors import ConfigError, PairlabError

# Configure logging
structlog.configure(
    processors=[
        structlog.stdlib.filter_by_level,
        structlog.stdlib.add_log_level,
        structlog.processors.TimeStamper(fmt="iso"),
        structlog.dev.ConsoleRenderer(),
    ],
    wrapper_class=structlog.stdlib.BoundLogger,
    context_class=dict,
    logger_factory=structlog.stdlib.LoggerFactory(),
    cache_logger_on_first_use=True,
)


@contextmanager
def _errors():
    """Report pairlab errors as one line on stderr and exit with their code."""
    try:
        yield
    except PairlabError as e:
        click.echo(f"Error: {e}", err=True)
        sys.exit(e.exit_code)
    except OSError as e:
        click.echo(f"Error: {e.filename or ''}: {e.strerror or e}", err=True)
        sys.exit(3)


@click.group()
@click.version_option(__version__, prog_name="pairlab")
@click.option("--log-level", default=None, help="Logging level (default: PAIRLAB_LOG_LEVEL or WARNING).")
def cli(log_level):
    """pairlab - Monte-Carlo lab for entangled photon-pair experiments."""
    level = (log_level or get_config().log_level).upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr, format="%(message)s")


@cli.command()
@click.argument("config_path", type=click.Path(dir_okay=False))
@click.argument("out_dir", required=False)
@click.option("--out", "-o", "out_option", help="Output directory (default: PAIRLAB_OUTPUT_DIR or ./out).")
@click.option("--seed", "-s", type=int, help="Override the scenario seed.")
@click.option("--format", "fmt", type=click.Choice(["csv"]), default="csv", show_default=True,
              help="Output table format.")
def run(config_path, out_dir, out_option, seed, fmt):
    """Run a scenario file and write report, tables and manifest."""
    from models.scenario import load_scenario
    from pipelines.runner import run_scenario

    out = Path(out_option or out_dir or get_config().output_dir)
    with _errors():
        scenario = load_scenario(config_path).with_seed(seed)
        click.echo(f"Running {scenario.kind.value} (seed {scenario.seed})...")
        files = run_scenario(scenario, out)
    for path in files:
        click.echo(f"  Wrote {path}")


@cli.command()
@click.argument("path", type=click.Path(dir_okay=False))
@click.option("--out", "-o", "out_path", help="Report file (default: <input>_report.txt).")
@click.option("--spacing-ns", type=float, default=12.5, show_default=True,
              help="Expected peak spacing for histograms.")
@click.option("--splitter", type=click.Choice(["demux", "beamsplitter"]), default="demux", show_default=True,
              help="How pairs were split, for mu inference.")
@click.option("--pileup/--no-pileup", default=True, show_default=True,
              help="Apply pile-up correction when the start count is known.")
@click.option("--s1", type=float, help="Singles rate arm 1 (Hz), for accidental subtraction.")
@click.option("--s2", type=float, help="Singles rate arm 2 (Hz), for accidental subtraction.")
@click.option("--window-ns", type=float, help="Coincidence window width (ns).")
@click.option("--duration-s", type=float, help="Integration time per scan point (s).")
def analyze(path, out_path, spacing_ns, splitter, pileup, s1, s2, window_ns, duration_s):
    """Analyze a histogram CSV (peaks, mu) or a scan CSV (visibility)."""
    from models.specs import Splitter
    from pipelines.runner import analyze_file

    source = Path(path)
    report = Path(out_path) if out_path else source.with_name(source.stem + "_report.txt")
    with _errors():
        if spacing_ns <= 0:
            raise ConfigError("--spacing-ns must be positive")
        written = analyze_file(
            source,
            report,
            spacing=spacing_ns * 1e-9,
            splitter=Splitter(splitter),
            pileup=pileup,
            s1=s1,
            s2=s2,
            window=window_ns * 1e-9 if window_ns is not None else None,
            duration=duration_s,
        )
    click.echo(f"Wrote {written}")


@cli.command()
@click.option("--model", default="lithium_niobate", show_default=True, help="Dispersion model.")
@click.option("--pump-nm", type=float, required=True, help="Pump wavelength.")
@click.option("--signal-nm", type=float, help="Signal wavelength (default: degenerate).")
@click.option("--temperature", type=float, default=25.0, show_default=True, help="Crystal temperature (C).")
@click.option("--length-mm", type=float, required=True, help="Crystal length.")
@click.option("--index-offset", type=float, help="Override the model's waveguide index offset.")
@click.option("--grid-start-nm", type=float, help="Spectrum grid start.")
@click.option("--grid-stop-nm", type=float, help="Spectrum grid stop.")
@click.option("--grid-step-nm", type=float, default=0.1, show_default=True, help="Spectrum grid step.")
@click.option("--period-um", type=float, help="Fixed poling period (default: solve for it).")
@click.option("--temperatures", help="Comma-separated temperatures (C) for a tuning curve.")
@click.option("--out", "-o", "out_dir", help="Output directory (default: PAIRLAB_OUTPUT_DIR or ./out).")
def qpm(model, pump_nm, signal_nm, temperature, length_mm, index_offset, grid_start_nm,
        grid_stop_nm, grid_step_nm, period_um, temperatures, out_dir):
    """Design a poled crystal: period, residual mismatch and PDC spectrum."""
    from pydantic import ValidationError

    from formatters.report import write_manifest, write_report
    from models.scenario import QpmSettings
    from pipelines.runner import write_qpm_design

    out = Path(out_dir or get_config().output_dir)

    def nm(value):
        return value * 1e-9 if value is not None else None

    with _errors():
        try:
            tuning = tuple(float(t) for t in temperatures.split(",")) if temperatures else ()
        except ValueError:
            raise ConfigError(f"--temperatures: cannot parse '{temperatures}'") from None
        try:
            settings = QpmSettings(
                model=model,
                pump_wavelength=nm(pump_nm),
                signal_wavelength=nm(signal_nm),
                temperature=temperature,
                length=length_mm * 1e-3,
                index_offset=index_offset,
                grid_start=nm(grid_start_nm),
                grid_stop=nm(grid_stop_nm),
                grid_step=nm(grid_step_nm),
                period=period_um * 1e-6 if period_um is not None else None,
                temperatures=tuning,
            )
        except ValidationError as e:
            details = e.errors()[0]
            raise ConfigError(f"{'.'.join(map(str, details['loc']))}: {details['msg']}") from None

        fields, files = write_qpm_design(settings, out)
        files.append(write_report(fields, out / "report.txt"))
        write_manifest(out / "manifest.json", "qpm_design", None, "", files)

    click.echo(f"Poling period: {fields['period_um']:.4f} um ({'solved' if fields['period_solved'] else 'fixed'})")
    click.echo(f"Residual mismatch: {fields['residual_rad_per_m']:.4g} rad/m")
    click.echo(f"Spectrum FWHM: {fields['fwhm_nm']:.4f} nm at {fields['peak_nm']:.3f} nm")
    click.echo(f"Wrote {out}")


@cli.command()
def models():
    """List the built-in dispersion models."""
    from optics.dispersion import available_models, get_model

    for name in available_models():
        click.echo(f"  {name:22s} index offset {get_model(name).index_offset:g}")


if __name__ == "__main__":
    cli()
