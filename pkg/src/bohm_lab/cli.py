"""Command-line interface for the Bohm potential lab.

Commands:
- figures: Figure 1-4 data tables (CSV + sidecar JSON)
- forward: quantum potential of an amplitude CSV
- solve: bound state of an analytic or CSV potential
- inverse: amplitude whose quantum potential is a given target
- verify: stationary identity check (langgraph pipeline with grid refinement)
- trajectories: Bohmian trajectories of analytic wave packets
- status: configuration and fiducial catalogue

Exit codes: 0 success, 2 usage/input error, 3 numerical failure,
4 verification failure.

Examples:
    >>> bohm-lab figures --fig 1 --out fig1.csv
    >>> bohm-lab verify --family harmonic --n 2
    >>> bohm-lab --hbar 2 solve --family box --L 1 --n 0
"""

import json
import sys
from pathlib import Path
from typing import Any, Dict, Literal, Optional, Tuple

import click
import numpy as np
from pydantic import BaseModel, field_validator

from bohm_lab import __version__
from bohm_lab.config import configure_logging, get_config, load_family_defaults, load_fiducials
from bohm_lab.data.serialization import (
    Sidecar,
    grid_descriptor,
    read_field_csv,
    report_json,
    sidecar_path,
    write_field_csv,
    write_sidecar,
    write_solution,
    write_trajectories_csv,
)
from bohm_lab.errors import (
    DomainError,
    DomainTooSmallError,
    NoBoundStateError,
    NumericalError,
)
from bohm_lab.figures import build_figure, write_figure
from bohm_lab.numerics.analytic import (
    FamilyTag,
    ReferenceFamily,
    classical_potential_field,
    default_grid,
    quantum_potential_field,
)
from bohm_lab.numerics.bohm import (
    PacketSpec,
    PlaneWave,
    bohm_trajectories,
    sample_initial_positions,
)
from bohm_lab.numerics.eigensolver import (
    BoundaryChoice,
    BoundaryKind,
    inverse_from_quantum_potential,
    solve_bound_state,
)
from bohm_lab.numerics.fields import FieldMeaning
from bohm_lab.numerics.qpotential import PhysParams, quantum_potential
from bohm_lab.pipelines.verify import VerifyState, run_verify_pipeline

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3
EXIT_VERIFY = 4

BOUND_FAMILIES = [FamilyTag.HARMONIC.value, FamilyTag.HYDROGEN_S.value, FamilyTag.BOX.value]


class RunConfig(BaseModel):
    """Validated flags of one command invocation."""

    command: Literal["figures", "forward", "solve", "inverse", "verify", "trajectories"]
    params: Dict[str, Any] = {}
    out: Optional[Path] = None

    @field_validator("params")
    @classmethod
    def _positive_physics(cls, params: Dict[str, Any]) -> Dict[str, Any]:
        for key in ("mass", "hbar", "omega", "charge", "v0", "kappa", "length", "h", "dt", "t_end", "width"):
            value = params.get(key)
            if value is not None and not float(value) > 0.0:
                raise ValueError(f"{key} must be positive, got {value}")
        return params

    @field_validator("out")
    @classmethod
    def _writable(cls, out: Optional[Path]) -> Optional[Path]:
        if out is not None and out.exists() and out.is_dir():
            raise ValueError(f"Output path is a directory: {out}")
        return out


def _exit_code(error: Exception) -> int:
    """Map an exception onto the exit-code contract."""
    if isinstance(error, (NoBoundStateError, DomainTooSmallError, NumericalError)):
        return EXIT_NUMERICAL
    if isinstance(error, (DomainError, FileNotFoundError, KeyError, ValueError)):
        return EXIT_USAGE
    raise error


def _fail(error: Exception) -> None:
    code = _exit_code(error)
    label = "Numerical failure" if code == EXIT_NUMERICAL else "Input error"
    click.echo(f"{label}: {error}", err=True)
    sys.exit(code)


def _family_params(family: Optional[str], **flags: Optional[float]) -> Dict[str, float]:
    """Given flags over the catalogue defaults of the family."""
    given = {key: value for key, value in flags.items() if value is not None}
    if family is None:
        return given
    return {**load_family_defaults(family), **given}


def _output_path(ctx: click.Context, out: Optional[str], default_name: str) -> Path:
    if out:
        return Path(out)
    return ctx.obj["config"].output_dir / default_name


def _emit(payload: Dict[str, Any]) -> None:
    click.echo(json.dumps(payload, indent=2, sort_keys=True))


def _family_options(func):
    """Shared physical flags of the family-based commands."""
    options = [
        click.option("--m", "mass", type=float, default=1.0, show_default=True, help="Particle mass."),
        click.option("--omega", type=float, help="Oscillator frequency (harmonic, default 0.5)."),
        click.option("--e", "--charge", "charge", type=float, help="Charge e (hydrogen_s, default 1)."),
        click.option("--L", "--length", "length", type=float, help="Box length (box, default 1)."),
        click.option("--h", "h", type=float, help="Grid spacing (default per family)."),
    ]
    for option in reversed(options):
        func = option(func)
    return func


@click.group()
@click.option(
    "--hbar",
    type=float,
    default=None,
    help="Planck constant (default 1, or BOHM_LAB_HBAR).",
)
@click.option(
    "--debug",
    "debug",
    is_flag=True,
    default=False,
    help="Enable debug logging.",
)
@click.version_option(__version__, prog_name="bohm-lab")
@click.pass_context
def main(ctx: click.Context, hbar: Optional[float], debug: bool) -> None:
    """Bohm potential lab: forward and inverse quantum-potential maps.

    Computes the quantum potential of an amplitude, the amplitude sourcing a
    target quantum potential, stationary identity checks and Bohmian
    trajectories. Outputs are CSV tables plus sidecar JSON.

    Examples:
        \b
        # Figure 1 data (harmonic source of an inverted oscillator V_Q)
        bohm-lab figures --fig 1

        \b
        # Identity check of the second excited oscillator state
        bohm-lab verify --family harmonic --n 2
    """
    ctx.ensure_object(dict)
    try:
        ctx.obj["config"] = get_config(hbar=hbar, debug=debug)
    except ValueError as e:
        click.echo(f"Configuration error: {e}", err=True)
        sys.exit(EXIT_USAGE)
    configure_logging(debug)


@main.command()
@click.option("--fig", "figure", type=click.IntRange(1, 4), required=True, help="Figure number 1-4.")
@click.option("--branch", type=click.Choice(["Ai", "Bi"]), default=None, help="Airy branch (figure 4).")
@click.option("--h", "h", type=float, default=None, help="Override the catalogue spacing.")
@click.option("--out", "-o", type=click.Path(), help="Output CSV (default figN.csv).")
@click.pass_context
def figures(ctx: click.Context, figure: int, branch: Optional[str], h: Optional[float], out: Optional[str]) -> None:
    """Write the data table of Figure 1-4.

    Columns x,v_q,r (figure 2: r,v_q,r_amp); the sidecar records the
    parameters, the E_0 offset (figures 1-2) and the branch (figure 4).

    Example:
        \b
        bohm-lab figures --fig 4 --branch Bi --out fig4_bi.csv
    """
    config = ctx.obj["config"]
    try:
        run = RunConfig(
            command="figures",
            params={"figure": figure, "branch": branch, "h": h},
            out=_output_path(ctx, out, f"fig{figure}.csv"),
        )
        table = build_figure(figure, branch=branch, hbar=config.hbar, h=h)
        written = write_figure(table, run.out)
    except Exception as e:
        _fail(e)
    click.echo(f"Wrote {', '.join(str(p) for p in written)}", err=True)


@main.command()
@click.option("--in", "in_path", type=click.Path(), required=True, help="Amplitude CSV (x|r, value).")
@click.option("--column", default="value", show_default=True, help="Amplitude column.")
@click.option("--m", "mass", type=float, default=1.0, show_default=True, help="Particle mass.")
@click.option("--even", "even_symmetry", is_flag=True, default=False, help="Even extension at r = 0.")
@click.option("--out", "-o", type=click.Path(), help="Output CSV (default v_q.csv).")
@click.pass_context
def forward(
    ctx: click.Context, in_path: str, column: str, mass: float, even_symmetry: bool, out: Optional[str]
) -> None:
    """Quantum potential V_Q = -(hbar^2/2m) laplacian(R)/R of an amplitude.

    Masked points (edges, nodes) are written as empty cells.
    """
    config = ctx.obj["config"]
    try:
        run = RunConfig(
            command="forward", params={"mass": mass, "hbar": config.hbar}, out=_output_path(ctx, out, "v_q.csv")
        )
        R = read_field_csv(in_path, column=column, meaning=FieldMeaning.AMPLITUDE)
        V_Q = quantum_potential(
            R, PhysParams(mass=mass, hbar=config.hbar), node_tol=config.node_tol, even_symmetry=even_symmetry
        )
        write_field_csv(V_Q, run.out, value_name="v_q")
        write_sidecar(
            Sidecar(
                command="forward",
                params={"input": in_path, "column": column, **run.params},
                grid=grid_descriptor(V_Q),
                tolerances={"node_tol": config.node_tol},
                library_version=__version__,
            ),
            sidecar_path(run.out),
        )
    except Exception as e:
        _fail(e)
    click.echo(f"Wrote {run.out} ({V_Q.masked_fraction:.3f} masked)", err=True)


def _bound_family(family: str, params: Dict[str, float], hbar: float) -> ReferenceFamily:
    return ReferenceFamily.from_params(family, params, hbar=hbar)


def _boundary(fam: ReferenceFamily, grid) -> BoundaryChoice:
    if fam.tag == FamilyTag.BOX:
        return BoundaryChoice(BoundaryKind.DIRICHLET_BOX)
    return BoundaryChoice.for_grid(grid)


@main.command()
@click.option("--family", type=click.Choice(BOUND_FAMILIES), help="Analytic potential family.")
@click.option("--potential", "potential_path", type=click.Path(), help="Potential CSV (x|r, value).")
@click.option("--n", "n", type=int, default=0, show_default=True, help="Quantum number.")
@_family_options
@click.option("--box", "box", is_flag=True, default=False, help="Hard walls for a CSV potential.")
@click.option("--out", "-o", type=click.Path(), help="Amplitude CSV (default solution.csv).")
@click.pass_context
def solve(
    ctx: click.Context,
    family: Optional[str],
    potential_path: Optional[str],
    n: int,
    mass: float,
    omega: Optional[float],
    charge: Optional[float],
    length: Optional[float],
    h: Optional[float],
    box: bool,
    out: Optional[str],
) -> None:
    """Bound state n of a classical potential.

    Writes the amplitude CSV and a JSON header (energy, nodes, grid,
    iterations) next to it; the header is also printed.

    Example:
        \b
        bohm-lab solve --family box --L 1 --n 0
    """
    config = ctx.obj["config"]
    try:
        params = _family_params(family, mass=mass, omega=omega, charge=charge, length=length, h=h)
        run = RunConfig(command="solve", params=params, out=_output_path(ctx, out, "solution.csv"))
        p = PhysParams(mass=mass, hbar=config.hbar)
        if (family is None) == (potential_path is None):
            raise click.UsageError("Give exactly one of --family or --potential")
        if family is not None:
            fam = _bound_family(family, params, config.hbar)
            grid = default_grid(fam, h)
            V = classical_potential_field(fam, grid)
            bc = _boundary(fam, grid)
        else:
            V = read_field_csv(potential_path, meaning=FieldMeaning.POTENTIAL)
            bc = BoundaryChoice(BoundaryKind.DIRICHLET_BOX) if box else BoundaryChoice.for_grid(V.grid)
        sol = solve_bound_state(V, n, p, bc)
        written = write_solution(sol, run.out)
    except click.UsageError:
        raise
    except Exception as e:
        _fail(e)
    _emit(sol.to_header())
    click.echo(f"Wrote {', '.join(str(path) for path in written)}", err=True)


@main.command()
@click.option(
    "--family",
    type=click.Choice([FamilyTag.HARMONIC.value, FamilyTag.HYDROGEN_S.value]),
    help="Analytic V_Q target (inverted oscillator, repulsive Coulomb).",
)
@click.option("--in", "in_path", type=click.Path(), help="Target V_Q CSV (x|r, value).")
@click.option("--n", "n", type=int, default=0, show_default=True, help="Source state index.")
@_family_options
@click.option("--out", "-o", type=click.Path(), help="Amplitude CSV (default source.csv).")
@click.pass_context
def inverse(
    ctx: click.Context,
    family: Optional[str],
    in_path: Optional[str],
    n: int,
    mass: float,
    omega: Optional[float],
    charge: Optional[float],
    length: Optional[float],
    h: Optional[float],
    out: Optional[str],
) -> None:
    """Amplitude whose quantum potential equals the target plus E_n.

    Solves the bound state of -V_Q; the offset E_n goes to the header and
    sidecar.

    Example:
        \b
        bohm-lab inverse --family harmonic --omega 0.5
    """
    config = ctx.obj["config"]
    try:
        params = _family_params(family, mass=mass, omega=omega, charge=charge, length=length, h=h)
        run = RunConfig(command="inverse", params=params, out=_output_path(ctx, out, "source.csv"))
        p = PhysParams(mass=mass, hbar=config.hbar)
        if (family is None) == (in_path is None):
            raise click.UsageError("Give exactly one of --family or --in")
        if family is not None:
            fam = _bound_family(family, params, config.hbar)
            target = quantum_potential_field(fam, default_grid(fam, h))
        else:
            target = read_field_csv(in_path, meaning=FieldMeaning.POTENTIAL)
        sol = inverse_from_quantum_potential(target, n, p)
        written = write_solution(sol, run.out)
        written.append(
            write_sidecar(
                Sidecar(
                    command="inverse",
                    params={"family": family, "input": in_path, "n": n, "hbar": config.hbar, **params},
                    grid=grid_descriptor(sol.amplitude),
                    energy_offset=sol.energy,
                    library_version=__version__,
                ),
                sidecar_path(run.out),
            )
        )
    except click.UsageError:
        raise
    except Exception as e:
        _fail(e)
    _emit(sol.to_header())
    click.echo(f"Wrote {', '.join(str(path) for path in written)}", err=True)


@main.command()
@click.option("--family", type=click.Choice(BOUND_FAMILIES), help="Analytic potential family.")
@click.option("--potential", "potential_path", type=click.Path(), help="Potential CSV (x|r, value).")
@click.option("--n", "n", type=int, default=0, show_default=True, help="Quantum number.")
@_family_options
@click.option("--tol", type=float, default=None, help="Residual tolerance (default 1e-3*max(1,|E_n|)).")
@click.option("--energy-tol", type=float, default=1e-4, show_default=True, help="Two-grid energy tolerance.")
@click.option("--max-refinements", type=int, default=2, show_default=True, help="Grid halvings allowed.")
@click.option("--out", "-o", type=click.Path(), help="Also write the report JSON here.")
@click.pass_context
def verify(
    ctx: click.Context,
    family: Optional[str],
    potential_path: Optional[str],
    n: int,
    mass: float,
    omega: Optional[float],
    charge: Optional[float],
    length: Optional[float],
    h: Optional[float],
    tol: Optional[float],
    energy_tol: float,
    max_refinements: int,
    out: Optional[str],
) -> None:
    """Check V_Q[R_n] = -V + E_n for a solved bound state.

    Prints the identity report JSON; exit 0 when max_residual is within the
    tolerance, 4 otherwise.

    Example:
        \b
        bohm-lab verify --family harmonic --n 0 --m 1 --omega 0.5
    """
    config = ctx.obj["config"]
    try:
        params = _family_params(family, mass=mass, omega=omega, charge=charge, length=length)
        run = RunConfig(command="verify", params={**params, "h": h}, out=Path(out) if out else None)
        state = VerifyState(
            family=family,
            params=params,
            n=n,
            hbar=config.hbar,
            potential_path=potential_path,
            h=h,
            residual_tolerance=tol,
            energy_tolerance=energy_tol,
            node_tol=config.node_tol,
            max_refinements=max_refinements,
        )
        result = run_verify_pipeline(state)
    except Exception as e:
        _fail(e)

    payload = report_json(result.report)
    click.echo(payload)
    if run.out is not None:
        run.out.parent.mkdir(parents=True, exist_ok=True)
        run.out.write_text(payload + "\n")
    for key, value in result.validation_metrics.items():
        click.echo(f"  {key}: {value}", err=True)

    if not result.identity_passed:
        click.echo(
            f"Identity residual {result.report.max_residual:.3e} exceeds {result.tolerance_used:.3e}",
            err=True,
        )
        sys.exit(EXIT_VERIFY)


def _provider(spec: str, params: Dict[str, float], p: PhysParams):
    if spec == "two_gaussian":
        return PacketSpec.two_gaussian(
            separation=params["separation"], width=params["width"], k=params["k"], p=p
        )
    if spec == "single_gaussian":
        return PacketSpec.single(center=params["center"], width=params["width"], k=params["k"], p=p)
    return PlaneWave(k=params["k"], p=p)


def _initial_positions(spec: str, provider, x0: Tuple[float, ...], count: int) -> np.ndarray:
    if x0:
        return np.asarray(x0, dtype=float)
    if spec == "plane_wave":
        return np.linspace(-1.0, 1.0, count)
    return sample_initial_positions(provider, count)


@main.command()
@click.option(
    "--spec",
    "spec",
    type=click.Choice(["two_gaussian", "single_gaussian", "plane_wave"]),
    default="two_gaussian",
    show_default=True,
    help="Wave provider.",
)
@click.option("--t-end", type=float, required=True, help="Final time.")
@click.option("--dt", type=float, default=1e-3, show_default=True, help="RK4 step.")
@click.option("--count", type=int, default=6, show_default=True, help="Born-sampled trajectories.")
@click.option("--x0", multiple=True, type=float, help="Explicit initial position (repeatable).")
@click.option("--m", "mass", type=float, default=1.0, show_default=True, help="Particle mass.")
@click.option("--sigma", "width", type=float, default=1.0, show_default=True, help="Packet width.")
@click.option("--k", "k", type=float, default=0.0, show_default=True, help="Wavenumber.")
@click.option("--separation", type=float, default=4.0, show_default=True, help="Half-distance in widths.")
@click.option("--center", type=float, default=0.0, show_default=True, help="Single packet centre.")
@click.option("--out", "-o", type=click.Path(), help="Output CSV (default trajectories.csv).")
@click.pass_context
def trajectories(
    ctx: click.Context,
    spec: str,
    t_end: float,
    dt: float,
    count: int,
    x0: Tuple[float, ...],
    mass: float,
    width: float,
    k: float,
    separation: float,
    center: float,
    out: Optional[str],
) -> None:
    """Bohmian trajectories dx/dt = v(x, t) of an analytic wave.

    Writes `t,x_1,...,x_m`; trajectories halted at a node are padded with
    empty cells.

    Example:
        \b
        bohm-lab trajectories --spec two_gaussian --t-end 8 --dt 1e-3
    """
    config = ctx.obj["config"]
    try:
        params = {
            "mass": mass,
            "hbar": config.hbar,
            "width": width,
            "k": k,
            "separation": separation,
            "center": center,
            "t_end": t_end,
            "dt": dt,
        }
        run = RunConfig(command="trajectories", params=params, out=_output_path(ctx, out, "trajectories.csv"))
        p = PhysParams(mass=mass, hbar=config.hbar)
        provider = _provider(spec, params, p)
        starts = _initial_positions(spec, provider, x0, count)
        paths = bohm_trajectories(provider, starts, t_end, dt)
        write_trajectories_csv(paths, run.out)
        write_sidecar(
            Sidecar(
                command="trajectories",
                params={"spec": spec, "initial_positions": [float(v) for v in starts], **params},
                library_version=__version__,
            ),
            sidecar_path(run.out),
        )
    except Exception as e:
        _fail(e)
    halted = sum(tr.halted for tr in paths)
    click.echo(f"Wrote {run.out}: {len(paths)} trajectories, {halted} halted", err=True)


@main.command()
@click.pass_context
def status(ctx: click.Context) -> None:
    """Show configuration and the fiducial catalogue."""
    config = ctx.obj["config"]

    click.echo("\n=== Bohm Potential Lab Status ===\n")
    click.echo(f"Version: {__version__}")
    click.echo(f"hbar: {config.hbar}")
    click.echo(f"Node tolerance: {config.node_tol}")
    click.echo(f"Output directory: {config.output_dir}")
    click.echo(f"Fiducials: {config.fiducials_path}")

    click.echo("\nFigures:")
    for figure in (1, 2, 3, 4):
        try:
            fid = load_fiducials(figure, config.fiducials_path)
        except (KeyError, ValueError, FileNotFoundError) as e:
            click.echo(f"  {figure}: unavailable ({e})")
            continue
        params = ", ".join(f"{k}={v}" for k, v in fid["params"].items())
        grid = fid["grid"]
        click.echo(
            f"  {figure}: {fid['family']} ({params}) on [{grid['x_min']}, {grid['x_max']}] h={grid['h']}"
        )


if __name__ == "__main__":
    main(obj={})
