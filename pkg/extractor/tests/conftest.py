import numpy as np
import pytest
from PIL import Image

IMAGE_SIZE = 32


def make_toy_dataset(root, n_images, seed=0):
    """Random RGB images plus a manifest cycling through all four
    (infection, ischaemia) flag pairs."""
    rng = np.random.default_rng(seed)
    image_dir = root / "images"
    image_dir.mkdir(exist_ok=True)
    flag_cycle = [(0, 0), (1, 0), (0, 1), (1, 1)]
    lines = ["filename,infection,ischaemia"]
    for i in range(n_images):
        name = f"img_{i:03d}.png"
        pixels = rng.integers(0, 256, size=(IMAGE_SIZE, IMAGE_SIZE, 3),
                              dtype=np.uint8)
        Image.fromarray(pixels, "RGB").save(image_dir / name)
        infection, ischaemia = flag_cycle[i % 4]
        lines.append(f"{name},{infection},{ischaemia}")
    manifest = root / "manifest.csv"
    manifest.write_text("\n".join(lines) + "\n")
    return image_dir, manifest


@pytest.fixture()
def toy_dataset(tmp_path):
    return make_toy_dataset(tmp_path, 12)
