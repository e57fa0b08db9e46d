import numpy as np
import pytest
import torch

from dfufeatures.data import (
    ManifestError,
    label_of_flags,
    load_image,
    load_training_set,
    read_manifest,
    write_feature_csv,
)

from conftest import IMAGE_SIZE


class TestManifest:
    def test_reads_rows(self, toy_dataset):
        _, manifest = toy_dataset
        rows = read_manifest(manifest)
        assert len(rows) == 12
        assert rows[0] == ("img_000.png", 0, 0)
        assert rows[3] == ("img_003.png", 1, 1)

    def test_label_mapping_covers_all_pairs(self):
        assert label_of_flags(0, 0) == "none"
        assert label_of_flags(1, 0) == "infection"
        assert label_of_flags(0, 1) == "ischaemia"
        assert label_of_flags(1, 1) == "both"

    def test_bad_header(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("file,inf,isch\nx.png,0,0\n")
        with pytest.raises(ManifestError):
            read_manifest(path)

    def test_bad_flag_value(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("filename,infection,ischaemia\nx.png,0,2\n")
        with pytest.raises(ManifestError) as excinfo:
            read_manifest(path)
        assert "line 2" in str(excinfo.value)

    def test_wrong_column_count(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("filename,infection,ischaemia\nx.png,0\n")
        with pytest.raises(ManifestError):
            read_manifest(path)

    def test_no_rows(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("filename,infection,ischaemia\n")
        with pytest.raises(ManifestError):
            read_manifest(path)


class TestImages:
    def test_load_image_shape_and_range(self, toy_dataset):
        image_dir, _ = toy_dataset
        tensor = load_image(image_dir / "img_000.png", IMAGE_SIZE)
        assert tensor.shape == (3, IMAGE_SIZE, IMAGE_SIZE)
        assert tensor.dtype == torch.float32
        assert float(tensor.min()) >= -1.0
        assert float(tensor.max()) <= 1.0

    def test_resize_honors_target(self, toy_dataset):
        image_dir, _ = toy_dataset
        tensor = load_image(image_dir / "img_000.png", 48)
        assert tensor.shape == (3, 48, 48)

    def test_training_set_shapes(self, toy_dataset):
        image_dir, manifest = toy_dataset
        images, targets, names = load_training_set(image_dir, manifest,
                                                   IMAGE_SIZE)
        assert images.shape == (12, 3, IMAGE_SIZE, IMAGE_SIZE)
        assert targets.shape == (12, 2)
        assert names[5] == "img_005.png"
        # flag cycle: row 2 is (0, 1)
        assert targets[2].tolist() == [0.0, 1.0]

    def test_missing_image_is_strict_error(self, toy_dataset):
        image_dir, manifest = toy_dataset
        manifest.write_text(
            "filename,infection,ischaemia\nghost.png,0,0\n")
        with pytest.raises(ManifestError) as excinfo:
            load_training_set(image_dir, manifest, IMAGE_SIZE)
        assert "ghost.png" in str(excinfo.value)


class TestFeatureCsv:
    def test_written_file_shape(self, tmp_path):
        path = tmp_path / "features.csv"
        features = np.arange(6, dtype=np.float64).reshape(2, 3)
        write_feature_csv(path, features, ["none", "both"])
        lines = path.read_text().strip().split("\n")
        assert lines[0] == "f0,f1,f2,label"
        assert lines[1] == "0.0,1.0,2.0,none"
        assert lines[2] == "3.0,4.0,5.0,both"

    def test_row_count_mismatch(self, tmp_path):
        with pytest.raises(ValueError):
            write_feature_csv(tmp_path / "x.csv", np.ones((2, 3)), ["none"])

    def test_failed_write_leaves_nothing(self, tmp_path):
        target = tmp_path / "nodir" / "x.csv"
        with pytest.raises(OSError):
            write_feature_csv(target, np.ones((1, 3)), ["none"])
        assert not target.exists()
        assert list(tmp_path.iterdir()) == []
