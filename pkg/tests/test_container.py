import os

import numpy as np
import pytest

from depthrr import (CodecConfig, DepthMap, make_hemisphere, mwd_encode,
                     read_container, read_depth, write_container, write_depth)
from depthrr.container import (Sidecar, container_stem, deserialize_sidecar,
                               infer_depth_format, serialize_sidecar,
                               thumbnail_png_bytes)
from depthrr.errors import (MissingPart, ParseError, UnsupportedFormat,
                            VersionMismatch)


def full(values):
    values = np.asarray(values, dtype=np.float32)
    return DepthMap(values, np.ones(values.shape, dtype=bool))


class TestDepthIO:
    def test_pfm_roundtrip_hemisphere(self, tmp_path, hemisphere):
        path = str(tmp_path / "hemi.pfm")
        write_depth(hemisphere, path)
        back = read_depth(path)
        assert np.array_equal(back.values, hemisphere.values)
        from depthrr import depth_stats
        assert depth_stats(back).range == 256.0

    def test_nan_pixel_masked(self, tmp_path):
        values = np.array([[1.0, np.nan], [3.0, 4.0]], dtype=np.float32)
        z = DepthMap(np.nan_to_num(values), np.isfinite(values))
        path = str(tmp_path / "holes.pfm")
        write_depth(z, path)
        back = read_depth(path)
        assert back.valid.tolist() == [[True, False], [True, True]]
        assert back.values[0, 0] == 1.0

    def test_truncated_pfm(self, tmp_path):
        path = str(tmp_path / "trunc.pfm")
        with open(path, "wb") as f:
            f.write(b"Pf\n100 100\n-1.0\n\x00\x01")
        with pytest.raises(ParseError):
            read_depth(path)

    def test_rawf32_roundtrip(self, tmp_path, rng):
        z = full(rng.uniform(-5, 5, (7, 9)).astype(np.float32))
        path = str(tmp_path / "map.rawf32")
        write_depth(z, path)
        back = read_depth(path)
        assert np.array_equal(back.values, z.values)

    def test_rawf32_bad_magic(self, tmp_path):
        path = str(tmp_path / "bad.rawf32")
        with open(path, "wb") as f:
            f.write(b"NOPE" + b"\x00" * 20)
        with pytest.raises(ParseError):
            read_depth(path)

    def test_csv_roundtrip(self, tmp_path):
        z = full([[1.5, 2.5], [3.5, np.float32(4.25)]])
        path = str(tmp_path / "map.csv")
        write_depth(z, path)
        back = read_depth(path)
        assert np.allclose(back.values, z.values)

    def test_unit_scale(self, tmp_path):
        z = full([[1.0, 2.0]])
        path = str(tmp_path / "meters.pfm")
        write_depth(z, path)
        back = read_depth(path, unit_scale=1000.0)
        assert np.allclose(back.values, [[1000.0, 2000.0]])

    def test_unknown_extension(self):
        with pytest.raises(UnsupportedFormat):
            infer_depth_format("depth.xyz")


def make_sidecar(image_format="PNG", **overrides):
    fields = dict(method="MWD", n=2.0, p_mm=5.0, zr_min_mm=-3.0,
                  zr_range_mm=10.0, image_format=image_format,
                  image_file="x.png", approx_kind="identity")
    fields.update(overrides)
    return Sidecar(**fields)


class TestSidecar:
    def test_canonical_serialization(self):
        sc = make_sidecar()
        text = serialize_sidecar(sc)
        assert serialize_sidecar(deserialize_sidecar(text)) == text

    def test_comments_and_blank_lines_ignored(self):
        text = serialize_sidecar(make_sidecar())
        noisy = "# header comment\n\n" + text
        assert serialize_sidecar(deserialize_sidecar(noisy)) == text

    def test_version_mismatch(self):
        text = serialize_sidecar(make_sidecar()).replace(
            "version=1", "version=999")
        with pytest.raises(VersionMismatch):
            deserialize_sidecar(text)

    def test_bad_line(self):
        with pytest.raises(ParseError):
            deserialize_sidecar("version=1\nnot a key value line\n")

    def test_unknown_key(self):
        with pytest.raises(ParseError):
            deserialize_sidecar("version=1\nbogus=3\n")

    def test_p_consistency_enforced(self):
        with pytest.raises(ValueError):
            make_sidecar(p_mm=7.0)

    def test_full_precision_floats(self):
        sc = make_sidecar(zr_min_mm=0.1234567890123456789)
        back = deserialize_sidecar(serialize_sidecar(sc))
        assert back.zr_min_mm == sc.zr_min_mm


class TestContainer:
    @pytest.fixture()
    def encoded(self, hemi_residual):
        cfg = CodecConfig(method="MWD", n=2.0)
        img, z_min, rng = mwd_encode(hemi_residual, cfg)
        sc = make_sidecar(n=2.0, p_mm=rng / 2.0, zr_min_mm=z_min,
                          zr_range_mm=rng, image_file="case.png")
        return img, sc

    def test_png_roundtrip_bit_exact(self, tmp_path, encoded):
        img, sc = encoded
        stem = str(tmp_path / "case")
        total = write_container(img, sc, stem)
        back, sc2, thumb = read_container(stem)
        assert np.array_equal(back.to_array(), img.to_array())
        assert thumb is None
        assert serialize_sidecar(sc2) == serialize_sidecar(sc)
        assert total == (os.path.getsize(stem + ".png")
                         + os.path.getsize(stem + ".meta"))

    def test_jpeg_roundtrip_decodes(self, tmp_path, encoded):
        img, _ = encoded
        sc = make_sidecar(n=2.0, p_mm=2.5, zr_min_mm=0.0, zr_range_mm=5.0,
                          image_format="JPEG", jpeg_quality=80,
                          image_file="case.jpg")
        stem = str(tmp_path / "case")
        write_container(img, sc, stem)
        back, _, _ = read_container(stem)
        assert back.to_array().shape == img.to_array().shape
        # lossy, but close on average
        err = np.abs(back.to_array().astype(int) - img.to_array().astype(int))
        assert err.mean() < 16

    def test_total_size_accounting_with_thumbnail(self, tmp_path, encoded,
                                                  hemi_thumbnail):
        img, _ = encoded
        t = hemi_thumbnail
        sc = make_sidecar(n=2.0, p_mm=2.5, zr_min_mm=0.0, zr_range_mm=5.0,
                          approx_kind="thumbnail", thumb_file="case.thumb.png",
                          block_w=t.block_w, block_h=t.block_h,
                          target_w=t.target_w, target_h=t.target_h,
                          thumb_z_min=t.z_min, thumb_z_range=t.z_range)
        stem = str(tmp_path / "case")
        total = write_container(img, sc, stem, thumbnail=t)
        parts = sum(os.path.getsize(stem + ext)
                    for ext in (".png", ".meta", ".thumb.png"))
        assert total == parts
        assert os.path.getsize(stem + ".thumb.png") == thumbnail_png_bytes(t)

    def test_missing_thumbnail_part(self, tmp_path, encoded, hemi_thumbnail):
        img, _ = encoded
        t = hemi_thumbnail
        sc = make_sidecar(n=2.0, p_mm=2.5, zr_min_mm=0.0, zr_range_mm=5.0,
                          approx_kind="thumbnail", thumb_file="case.thumb.png",
                          block_w=t.block_w, block_h=t.block_h,
                          target_w=t.target_w, target_h=t.target_h,
                          thumb_z_min=t.z_min, thumb_z_range=t.z_range)
        stem = str(tmp_path / "case")
        write_container(img, sc, stem, thumbnail=t)
        os.remove(stem + ".thumb.png")
        with pytest.raises(MissingPart):
            read_container(stem)

    def test_missing_sidecar(self, tmp_path):
        with pytest.raises(MissingPart):
            read_container(str(tmp_path / "nothing"))

    def test_stem_inference(self):
        assert container_stem("a/b/case.meta") == "a/b/case"
        assert container_stem("case.thumb.png") == "case"
        assert container_stem("case.jpg") == "case"
        assert container_stem("case") == "case"

    def test_thumbnail_16bit_payload_roundtrip(self, tmp_path, encoded,
                                               hemi_thumbnail):
        img, _ = encoded
        t = hemi_thumbnail
        sc = make_sidecar(n=2.0, p_mm=2.5, zr_min_mm=0.0, zr_range_mm=5.0,
                          approx_kind="thumbnail", thumb_file="case.thumb.png",
                          block_w=t.block_w, block_h=t.block_h,
                          target_w=t.target_w, target_h=t.target_h,
                          thumb_z_min=t.z_min, thumb_z_range=t.z_range)
        stem = str(tmp_path / "case")
        write_container(img, sc, stem, thumbnail=t)
        _, _, back = read_container(stem)
        assert np.array_equal(back.samples, t.samples)
        assert back.z_min == t.z_min and back.z_range == t.z_range
