"""Command-line front end.

Every command is a thin client of the HTTP service: with `--server` it
talks to a remote instance, otherwise it drives an in-process app through
the same request/response models. Images travel as base64 bytes, so the
image-level commands also work against a remote server; directory-level
commands (build-index, simulate-tgc, evaluate) name paths on the server's
filesystem, which is the local one in the default in-process mode.

Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import base64
from pathlib import Path

import click

from . import __version__


class ServiceError(Exception):
    """A request the service rejected; carries the service's message."""


class ServiceClient:
    def __init__(self, server: str | None):
        if server:
            import httpx

            self._client = httpx.Client(base_url=server.rstrip("/"), timeout=600.0)
        else:
            import warnings

            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                from fastapi.testclient import TestClient

            from .service import create_app

            self._client = TestClient(create_app())

    def post(self, path: str, payload: dict) -> dict:
        response = self._client.post(path, json=payload)
        if response.status_code != 200:
            try:
                detail = response.json().get("detail", response.text)
            except ValueError:
                detail = response.text
            raise ServiceError(str(detail))
        return response.json()


def _client(ctx: click.Context) -> ServiceClient:
    return ServiceClient(ctx.obj)


def _image_payload(path: Path, what: str) -> dict:
    if not path.exists():
        raise click.ClickException(f"{what} image not found: {path}")
    return {"data_b64": base64.b64encode(path.read_bytes()).decode()}


def _network_payload(net: Path | None, weights: Path | None, levels: int) -> dict:
    payload: dict = {"identity_levels": levels}
    if net is not None:
        payload["spec_path"] = str(net)
    if weights is not None:
        payload["weights_path"] = str(weights)
    return payload


def _settings_payload(method: str, epsilon: float) -> dict:
    return {"method": method.replace("-", "_"), "epsilon": epsilon}


def _write_or_print(csv_text: str, out: Path | None) -> None:
    if out is None:
        click.echo(csv_text, nl=False)
    else:
        out.write_text(csv_text, encoding="utf-8")
        click.echo(f"wrote {out}")


_method_option = click.option(
    "--method",
    type=click.Choice(["adain", "adain-d", "wct"]),
    default="adain-d",
    show_default=True,
    help="Feature transform block.",
)
_net_option = click.option(
    "--net", type=click.Path(path_type=Path), default=None, help="Network spec JSON (server path)."
)
_weights_option = click.option(
    "--weights", type=click.Path(path_type=Path), default=None, help="WTS1 weights (server path)."
)
_levels_option = click.option(
    "--levels", type=int, default=2, show_default=True,
    help="Identity-network levels when no --net/--weights are given.",
)


@click.group()
@click.version_option(__version__)
@click.option(
    "--server",
    envvar="USSTYLE_SERVER",
    default=None,
    help="Base URL of a running usstyle service; default runs in-process.",
)
@click.pass_context
def main(ctx: click.Context, server: str | None) -> None:
    """Style transfer tooling for appearance-shifted grayscale images."""
    ctx.obj = server


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
def serve(host: str, port: int) -> None:
    """Run the HTTP service."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=host, port=port)


@main.command("build-index")
@click.argument("directory", type=click.Path(path_type=Path))
@click.option("--out", "out_path", type=click.Path(path_type=Path), required=True)
@click.pass_context
def build_index_cmd(ctx: click.Context, directory: Path, out_path: Path) -> None:
    """Index every image in DIRECTORY for style retrieval."""
    try:
        result = _client(ctx).post(
            "/index/build", {"directory": str(directory), "output_path": str(out_path)}
        )
    except ServiceError as exc:
        raise click.ClickException(str(exc)) from exc
    click.echo(f"indexed {result['entries']} images -> {result['output_path']}")
    for skipped in result["skipped"]:
        click.echo(f"skipped unreadable image: {skipped}")


@main.command("select-style")
@click.argument("content", type=click.Path(path_type=Path))
@click.option("--index", "index_path", type=click.Path(path_type=Path), required=True)
@click.option("--k", default=10, show_default=True, help="Candidates retrieved before selection.")
@click.pass_context
def select_style_cmd(ctx: click.Context, content: Path, index_path: Path, k: int) -> None:
    """Pick the best library style image for CONTENT."""
    try:
        result = _client(ctx).post(
            "/select",
            {
                "content": _image_payload(content, "content"),
                "index_path": str(index_path),
                "k": k,
            },
        )
    except ServiceError as exc:
        raise click.ClickException(str(exc)) from exc
    click.echo(
        f"selected style id={result['style_id']} path={result['style_path']} "
        f"correlation={result['correlation']:.4f} distance={result['distance']:.4f}"
    )
    click.echo(f"content stats: mean={result['content_mean']:.4f} std={result['content_std']:.4f}")
    for cand in result["candidates"]:
        click.echo(f"  candidate id={cand['id']} correlation={cand['correlation']:.4f} {cand['path']}")


@main.command()
@click.argument("content", type=click.Path(path_type=Path))
@click.option("--style", type=click.Path(path_type=Path), default=None, help="Explicit style image.")
@click.option("--index", "index_path", type=click.Path(path_type=Path), default=None)
@_net_option
@_weights_option
@_levels_option
@_method_option
@click.option("--epsilon", type=float, default=1e-5, show_default=True)
@click.option("--out", "out_path", type=click.Path(path_type=Path), required=True)
@click.pass_context
def transfer(
    ctx: click.Context,
    content: Path,
    style: Path | None,
    index_path: Path | None,
    net: Path | None,
    weights: Path | None,
    levels: int,
    method: str,
    epsilon: float,
    out_path: Path,
) -> None:
    """Re-render CONTENT with a style image's appearance statistics."""
    if (style is None) == (index_path is None):
        raise click.UsageError("give exactly one of --style or --index")
    payload = {
        "content": _image_payload(content, "content"),
        "network": _network_payload(net, weights, levels),
        "settings": _settings_payload(method, epsilon),
    }
    if style is not None:
        payload["style"] = _image_payload(style, "style")
    else:
        payload["index_path"] = str(index_path)
    try:
        result = _client(ctx).post("/transfer", payload)
    except ServiceError as exc:
        raise click.ClickException(str(exc)) from exc
    out_path.write_bytes(base64.b64decode(result["output_b64"]))
    if result["style_id"] is not None:
        click.echo(f"selected style id={result['style_id']} path={result['style_path']}")
    times = "  ".join(f"{k.removesuffix('_ms')}: {v:.1f} ms" for k, v in result["timings_ms"].items())
    click.echo(times)
    click.echo(
        f"ssim_vs_content={result['ssim_vs_content']:.4f} "
        f"psnr_vs_content={result['psnr_vs_content']:.2f} dB"
    )
    click.echo(f"wrote {out_path}")


@main.command()
@click.argument("content", type=click.Path(path_type=Path))
@click.option("--index", "index_path", type=click.Path(path_type=Path), required=True)
@_net_option
@_weights_option
@_levels_option
@_method_option
@click.option("--metric", type=click.Choice(["psnr", "ssim"]), default="psnr", show_default=True)
@click.option(
    "--reference", type=click.Path(path_type=Path), default=None,
    help="Score transfers against this image instead of CONTENT.",
)
@click.option("--out", "out_path", type=click.Path(path_type=Path), default=None)
@click.pass_context
def sweep(
    ctx: click.Context,
    content: Path,
    index_path: Path,
    net: Path | None,
    weights: Path | None,
    levels: int,
    method: str,
    metric: str,
    reference: Path | None,
    out_path: Path | None,
) -> None:
    """Transfer CONTENT against every library style and rank the results."""
    payload = {
        "content": _image_payload(content, "content"),
        "index_path": str(index_path),
        "network": _network_payload(net, weights, levels),
        "settings": _settings_payload(method, 1e-5),
        "metric": metric,
    }
    if reference is not None:
        payload["reference"] = _image_payload(reference, "reference")
    try:
        result = _client(ctx).post("/sweep", payload)
    except ServiceError as exc:
        raise click.ClickException(str(exc)) from exc
    rows = result["rows"]
    selected = next(r for r in rows if r["selected"])
    click.echo(f"swept {len(rows)} styles; best style_id={rows[0]['style_id']} {metric}={rows[0]['value']:.4f}")
    click.echo(
        f"selector's choice style_id={selected['style_id']} {metric}={selected['value']:.4f} "
        f"(rank {rows.index(selected) + 1})"
    )
    _write_or_print(result["csv"], out_path)


@main.command("simulate-tgc")
@click.option("--seed", default=42, show_default=True)
@click.option("--n", default=10, show_default=True, help="Number of phantom groups.")
@click.option("--variants", default=4, show_default=True, help="Gain variants per phantom.")
@click.option("--out", "out_dir", type=click.Path(path_type=Path), required=True)
@click.option("--height", default=96, show_default=True)
@click.option("--width", default=96, show_default=True)
@click.pass_context
def simulate_tgc(
    ctx: click.Context, seed: int, n: int, variants: int, out_dir: Path, height: int, width: int
) -> None:
    """Generate a synthetic gain-shift corpus with a manifest."""
    try:
        result = _client(ctx).post(
            "/simulate",
            {
                "seed": seed,
                "n": n,
                "variants": variants,
                "out_dir": str(out_dir),
                "height": height,
                "width": width,
            },
        )
    except ServiceError as exc:
        raise click.ClickException(str(exc)) from exc
    click.echo(
        f"wrote {result['originals']} originals, {result['variants']} variants, "
        f"{result['masks']} masks"
    )
    click.echo(f"manifest: {result['manifest_path']}")


@main.command()
@click.option("--corpus", "manifest_path", type=click.Path(path_type=Path), required=True)
@_net_option
@_weights_option
@_levels_option
@_method_option
@click.option("--out", "out_path", type=click.Path(path_type=Path), default=None)
@click.pass_context
def evaluate(
    ctx: click.Context,
    manifest_path: Path,
    net: Path | None,
    weights: Path | None,
    levels: int,
    method: str,
    out_path: Path | None,
) -> None:
    """Score raw, equalized and transferred variants against their originals."""
    try:
        result = _client(ctx).post(
            "/evaluate",
            {
                "manifest_path": str(manifest_path),
                "network": _network_payload(net, weights, levels),
                "settings": _settings_payload(method, 1e-5),
            },
        )
    except ServiceError as exc:
        raise click.ClickException(str(exc)) from exc
    for name, stats in result["summary"].items():
        click.echo(
            f"{name:>8}: psnr {stats['psnr_mean']:.2f} +- {stats['psnr_std']:.2f} dB, "
            f"ssim {stats['ssim_mean']:.4f} +- {stats['ssim_std']:.4f}"
        )
    for missing in result["missing"]:
        click.echo(f"missing corpus entry: {missing}")
    _write_or_print(result["csv"], out_path)


def _parse_size(value: str) -> tuple[int, int, int]:
    parts = value.lower().split("x")
    if len(parts) != 3:
        raise click.BadParameter(f"size must look like 256x64x64, got {value!r}")
    try:
        c, h, w = (int(p) for p in parts)
    except ValueError:
        raise click.BadParameter(f"size must be three integers, got {value!r}") from None
    return c, h, w


@main.command()
@click.option(
    "--sizes", "sizes", multiple=True, default=("256x64x64",), show_default=True,
    help="Feature-map sizes as CxHxW; repeatable.",
)
@click.option("--repetitions", default=11, show_default=True)
@click.option("--seed", default=42, show_default=True)
@click.option("--out", "out_path", type=click.Path(path_type=Path), default=None)
@click.pass_context
def benchmark(
    ctx: click.Context, sizes: tuple[str, ...], repetitions: int, seed: int, out_path: Path | None
) -> None:
    """Time the transform blocks on random feature maps."""
    parsed = [_parse_size(s) for s in sizes]
    try:
        result = _client(ctx).post(
            "/benchmark", {"sizes": parsed, "repetitions": repetitions, "seed": seed}
        )
    except ServiceError as exc:
        raise click.ClickException(str(exc)) from exc
    for row in result["rows"]:
        click.echo(f"{row['size']:>12}  {row['method']:>8}  {row['median_ms']:9.3f} ms")
    for size, ratio in result["ratios"].items():
        click.echo(f"{size}: wct/adain ratio = {ratio:.1f}x")
    _write_or_print(result["csv"], out_path)


if __name__ == "__main__":
    main()
