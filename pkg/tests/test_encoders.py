"""Preprocessing, asset loading, and encoder session behavior."""

import json
import shutil

import numpy as np
import pytest

from ddr.core import cosine_disparity
from ddr.degrade import DegradationKind, DegradationSpec, ddr_pixel
from ddr.encoders.assets import load_asset_manifest, sha256_file
from ddr.encoders.preprocess import (
    CHANNEL_MEAN,
    CHANNEL_STD,
    TARGET_SIZE,
    preprocess,
    preprocess_batch,
)
from ddr.encoders.session import (
    EncoderSession,
    build_degradation_set,
    encode_image,
    encode_image_batch,
    encode_text,
    encode_text_batch,
    load_assets,
)
from ddr.exceptions import AssetError, DegenerateDirectionError, SessionError
from ddr.images import load_image
from ddr.prompts import DegradationType, PromptPair, default_prompt_pairs


def rand_image(h, w, seed=0):
    return np.random.default_rng(seed).random((h, w, 3))


# ---------------------------------------------------------------------------
# preprocessing
# ---------------------------------------------------------------------------

def test_preprocess_shape_and_dtype():
    for h, w in [(224, 224), (120, 160), (448, 336), (224, 500), (901, 240)]:
        out = preprocess(rand_image(h, w))
        assert out.shape == (3, TARGET_SIZE, TARGET_SIZE)
        assert out.dtype == np.float32
        assert np.isfinite(out).all()


def test_preprocess_224_input_is_standardization_only():
    img = rand_image(224, 224, 1)
    out = preprocess(img)
    expected = ((img - CHANNEL_MEAN) / CHANNEL_STD).transpose(2, 0, 1)
    np.testing.assert_allclose(out, expected.astype(np.float32), atol=1e-6)


def test_preprocess_channel_mean_maps_to_zero():
    img = np.ones((224, 224, 3)) * CHANNEL_MEAN
    out = preprocess(img)
    np.testing.assert_allclose(out, 0.0, atol=1e-6)


def test_preprocess_geometry_shorter_side_and_center_crop():
    # 336x448: shorter side 336 -> 224, width floor(448*224/336)=298,
    # crop left = round((298-224)/2) = 37
    img = rand_image(336, 448, 2)
    out = preprocess(img)
    assert out.shape == (3, 224, 224)
    img_tall = rand_image(448, 336, 3)
    assert preprocess(img_tall).shape == (3, 224, 224)


def test_preprocess_matches_torchvision_reference(images_dir):
    torchvision = pytest.importorskip("torchvision")
    from PIL import Image as PILImage
    from torchvision import transforms

    path = images_dir / "geometry_336x448.png"
    reference_pipeline = transforms.Compose(
        [
            transforms.Resize(TARGET_SIZE, interpolation=transforms.InterpolationMode.BICUBIC),
            transforms.CenterCrop(TARGET_SIZE),
            transforms.ToTensor(),
            transforms.Normalize(tuple(CHANNEL_MEAN), tuple(CHANNEL_STD)),
        ]
    )
    with PILImage.open(path) as im:
        ref = reference_pipeline(im.convert("RGB")).numpy()
    ours = preprocess(load_image(path))
    assert ours.shape == ref.shape
    # float-channel vs saturating-uint8 resampling differ by about a pixel
    # step; 0.03 standardized units is roughly 1.5/255 in pixel units
    assert np.max(np.abs(ours - ref)) < 0.03


def test_preprocess_batch_stacks():
    imgs = [rand_image(100, 100, s) for s in range(3)]
    batch = preprocess_batch(imgs)
    assert batch.shape == (3, 3, TARGET_SIZE, TARGET_SIZE)
    np.testing.assert_array_equal(batch[1], preprocess(imgs[1]))


# ---------------------------------------------------------------------------
# assets
# ---------------------------------------------------------------------------

def test_manifest_loads_and_verifies(stub_assets_dir):
    manifest = load_asset_manifest(stub_assets_dir)
    assert manifest.model_id == "stub-encoder-v1"
    assert manifest.embedding_dim == 512
    assert manifest.context_length == 77
    assert set(manifest.file_hashes) == {
        "image_encoder.onnx",
        "text_encoder.onnx",
        "bpe_vocab.txt.gz",
    }


def test_missing_directory_rejected(tmp_path):
    with pytest.raises(AssetError, match="does not exist"):
        load_asset_manifest(tmp_path / "nope")


def test_missing_file_listed(tmp_path, stub_assets_dir):
    shutil.copytree(stub_assets_dir, tmp_path / "assets")
    (tmp_path / "assets" / "text_encoder.onnx").unlink()
    with pytest.raises(AssetError, match="text_encoder.onnx"):
        load_asset_manifest(tmp_path / "assets")


def test_hash_mismatch_detected(tmp_path, stub_assets_dir):
    shutil.copytree(stub_assets_dir, tmp_path / "assets")
    vocab = tmp_path / "assets" / "bpe_vocab.txt.gz"
    vocab.write_bytes(vocab.read_bytes() + b"tamper")
    with pytest.raises(AssetError, match="hash mismatch"):
        load_asset_manifest(tmp_path / "assets")
    # opt-out skips the content check
    load_asset_manifest(tmp_path / "assets", verify_hashes=False)


def test_manifest_missing_key_rejected(tmp_path, stub_assets_dir):
    shutil.copytree(stub_assets_dir, tmp_path / "assets")
    manifest_path = tmp_path / "assets" / "manifest.json"
    data = json.loads(manifest_path.read_text("utf-8"))
    del data["embedding_dim"]
    manifest_path.write_text(json.dumps(data), encoding="utf-8")
    with pytest.raises(AssetError, match="embedding_dim"):
        load_asset_manifest(tmp_path / "assets")


def test_sha256_file_matches_manifest(stub_assets_dir):
    manifest = load_asset_manifest(stub_assets_dir)
    actual = sha256_file(stub_assets_dir / "image_encoder.onnx")
    assert actual == manifest.file_hashes["image_encoder.onnx"]


# ---------------------------------------------------------------------------
# sessions
# ---------------------------------------------------------------------------

def test_bundle_sessions(bundle):
    assert bundle.image_session.kind == "image"
    assert bundle.text_session.kind == "text"
    assert bundle.image_session.embedding_dim == 512
    assert bundle.text_session.embedding_dim == 512


def test_encode_image_matches_golden(bundle, golden_dir):
    zero = np.zeros((3, 224, 224), dtype=np.float32)
    feat = encode_image(bundle.image_session, zero)
    golden = np.load(golden_dir / "stub_image_zero.npy")
    assert feat.shape == (512,)
    assert np.isfinite(feat).all()
    assert np.array_equal(feat, golden)


def test_encode_text_matches_golden(bundle, golden_dir):
    probe = json.loads((golden_dir / "stub_text_probe.json").read_text("utf-8"))
    tokens = bundle.tokenizer.tokenize(probe["text"])
    assert list(tokens.ids) == probe["ids"]
    feat = encode_text(bundle.text_session, tokens)
    golden = np.load(golden_dir / "stub_text_probe.npy")
    assert np.array_equal(feat, golden)


def test_encoding_is_pure(bundle):
    tensor = preprocess(rand_image(120, 160, 5))
    a = encode_image(bundle.image_session, tensor)
    b = encode_image(bundle.image_session, tensor)
    assert np.array_equal(a, b)


def test_batch_matches_single(bundle):
    tensors = preprocess_batch([rand_image(64, 64, s) for s in range(3)])
    batch_out = encode_image_batch(bundle.image_session, tensors)
    for i in range(3):
        single = encode_image(bundle.image_session, tensors[i])
        np.testing.assert_array_equal(batch_out[i].astype(np.float64), single)


def test_kind_mismatch_rejected(bundle):
    zero = np.zeros((3, 224, 224), dtype=np.float32)
    with pytest.raises(SessionError, match="image-encoder"):
        encode_image(bundle.text_session, zero)
    tokens = bundle.tokenizer.tokenize("hello")
    with pytest.raises(SessionError, match="text-encoder"):
        encode_text(bundle.image_session, tokens)


def test_session_load_rejects_unknown_kind(bundle):
    with pytest.raises(SessionError):
        EncoderSession.load(bundle.manifest, "audio")


def test_text_batch_round_trip(bundle):
    texts = ["a sharp photo", "a blurry photo"]
    seqs = [bundle.tokenizer.tokenize(t) for t in texts]
    feats = encode_text_batch(bundle.text_session, seqs)
    assert feats.shape == (2, 512)
    assert not np.array_equal(feats[0], feats[1])


# ---------------------------------------------------------------------------
# degradation set construction
# ---------------------------------------------------------------------------

def test_build_default_biqa_set(bundle):
    dset = build_degradation_set(
        default_prompt_pairs(), bundle.text_session, bundle.tokenizer
    )
    assert [t.value for t in dset.types] == ["color", "noise", "blur", "exposure"]
    vectors = [m.direction for m in dset]
    for i in range(len(vectors)):
        for j in range(i + 1, len(vectors)):
            assert not np.array_equal(vectors[i], vectors[j])


def test_build_set_rejects_duplicates(bundle):
    pairs = list(default_prompt_pairs()) + [default_prompt_pairs()[0]]
    with pytest.raises(Exception, match="duplicate"):
        build_degradation_set(pairs, bundle.text_session, bundle.tokenizer)


def test_whitespace_only_prompt_difference_is_degenerate(bundle):
    # differs as a string, but tokenizes identically -> zero direction
    pair = PromptPair(
        degradation=DegradationType.BLUR,
        degraded_prompt="a  blurry photo",
        clean_prompt="a blurry photo",
    )
    with pytest.raises(DegenerateDirectionError, match="blur"):
        build_degradation_set([pair], bundle.text_session, bundle.tokenizer)


def test_directions_are_image_independent(bundle):
    a = build_degradation_set(default_prompt_pairs(), bundle.text_session, bundle.tokenizer)
    b = build_degradation_set(default_prompt_pairs(), bundle.text_session, bundle.tokenizer)
    for ma, mb in zip(a, b):
        assert np.array_equal(ma.direction, mb.direction)


# ---------------------------------------------------------------------------
# pixel-domain response through the stub encoder
# ---------------------------------------------------------------------------

def test_ddr_pixel_zero_level_is_exactly_zero(bundle):
    img = rand_image(96, 128, 9)
    spec = DegradationSpec(DegradationKind.GAUSSIAN_BLUR, 0.0)
    assert ddr_pixel(img, spec, bundle.image_session) == 0.0


def test_ddr_pixel_in_metric_range(bundle):
    img = rand_image(96, 128, 10)
    spec = DegradationSpec(DegradationKind.GAUSSIAN_NOISE, 0.2, seed=3)
    val = ddr_pixel(img, spec, bundle.image_session)
    assert 0.0 <= val <= 2.0
    assert val > 0.0


def test_ddr_pixel_custom_metric(bundle):
    img = rand_image(64, 64, 11)
    spec = DegradationSpec(DegradationKind.EXPOSURE, 1.0)
    l2 = lambda a, b: float(np.linalg.norm(a - b))
    val = ddr_pixel(img, spec, bundle.image_session, metric=l2)
    assert val >= 0.0
    cos = ddr_pixel(img, spec, bundle.image_session, metric=cosine_disparity)
    assert cos != val
