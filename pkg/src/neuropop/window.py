"""Church-window plots: colour every point of a 2-D latent square by its strategy.

Column c maps to z0 = c/(g-1) left to right, row r to z1 = 1 - r/(g-1) top to
bottom, so the upper-left pixel is z = (0, 1) and the lower-right z = (1, 0).
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from neuropop.network import NetworkParams, forward

RED = (255, 0, 0)
GREEN = (0, 255, 0)
BLUE = (0, 0, 255)
YELLOW = (255, 255, 0)

# index order of the built-in games: (Hawk, Dove) and (All-C, TFT, ATFT, All-D)
PALETTES = {
    2: (RED, GREEN),
    3: (RED, GREEN, BLUE),
    4: (GREEN, BLUE, YELLOW, RED),
}


def latent_grid(resolution: int) -> np.ndarray:
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    ticks = np.linspace(0.0, 1.0, resolution)
    z0, z1 = np.meshgrid(ticks, ticks[::-1])
    return np.column_stack([z0.ravel(), z1.ravel()])


def window_strategies(params: NetworkParams, resolution: int = 128) -> np.ndarray:
    """Strategy vector at every pixel, shape (g, g, strategies)."""
    if params.latent_dim != 2:
        raise ValueError(f"window plots need a 2-dimensional latent space, this network has {params.latent_dim}")
    out, _ = forward(params, latent_grid(resolution))
    return out.reshape(resolution, resolution, params.n_strategies)


def strategy_colors(weights) -> np.ndarray:
    """Blend palette colours linearly by strategy weight; returns uint8 RGB."""
    weights = np.asarray(weights, dtype=np.float64)
    palette = PALETTES.get(weights.shape[-1])
    if palette is None:
        raise ValueError(f"no palette for {weights.shape[-1]} strategies")
    rgb = weights @ np.array(palette, dtype=np.float64)
    return np.clip(np.rint(rgb), 0, 255).astype(np.uint8)


def render_window_plot(params: NetworkParams, resolution: int = 128) -> np.ndarray:
    return strategy_colors(window_strategies(params, resolution))


def write_ppm(path, image: np.ndarray) -> None:
    """Binary P6 portable pixmap."""
    image = np.ascontiguousarray(image, dtype=np.uint8)
    h, w, _ = image.shape
    with open(path, "wb") as f:
        f.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        f.write(image.tobytes())


def read_ppm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    fields = []
    pos = 0
    while len(fields) < 4:
        while data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            pos = data.index(b"\n", pos) + 1
            continue
        end = pos
        while not data[end:end + 1].isspace():
            end += 1
        fields.append(data[pos:end])
        pos = end
    if fields[0] != b"P6" or int(fields[3]) != 255:
        raise ValueError("only 8-bit binary PPM (P6) is supported")
    w, h = int(fields[1]), int(fields[2])
    pixels = np.frombuffer(data, dtype=np.uint8, count=w * h * 3, offset=pos + 1)
    return pixels.reshape(h, w, 3).copy()


def write_image(path, image: np.ndarray) -> None:
    """PPM by default; ``.png`` goes through Pillow when it is installed."""
    path = Path(path)
    if path.suffix.lower() == ".png":
        try:
            from PIL import Image
        except ImportError:
            raise RuntimeError("PNG output needs Pillow; write a .ppm file instead") from None
        Image.fromarray(np.ascontiguousarray(image, dtype=np.uint8), "RGB").save(path)
    else:
        write_ppm(path, image)


def red_fraction(image: np.ndarray) -> float:
    """Share of pixels whose red channel beats the green one (hawk-majority pixels)."""
    img = image.astype(np.int64)
    return float(np.mean(img[..., 0] > img[..., 1]))
