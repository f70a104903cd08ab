"""Dataset-level evaluation through the stub encoders."""

import math

import numpy as np
import pytest

from ddr.core import quality_score
from ddr.encoders.preprocess import preprocess
from ddr.encoders.session import build_degradation_set, encode_image
from ddr.evaluation import (
    DatasetManifest,
    ManifestRecord,
    correlate_descriptors,
    ddr_objective,
    evaluate_biqa,
    load_manifest,
    objective_breakdown,
    srcc,
)
from ddr.exceptions import DataError
from ddr.images import load_image
from ddr.prompts import default_prompt_pairs


@pytest.fixture(scope="module")
def degradation_set(bundle):
    return build_degradation_set(
        default_prompt_pairs(), bundle.text_session, bundle.tokenizer
    )


@pytest.fixture(scope="module")
def manifest(fixtures_dir):
    return load_manifest(fixtures_dir / "manifest.csv")


def test_evaluate_biqa_full_run(manifest, degradation_set, bundle):
    result = evaluate_biqa(manifest, degradation_set, bundle.image_session)
    assert result.n_images == 5
    assert len(result.per_image) == 5
    assert not result.failures
    assert -1.0 <= result.srcc <= 1.0
    assert result.degradation_set_used == ("color", "noise", "blur", "exposure")
    # srcc recomputable from the retained per-image scores
    rho = srcc([s.q_ddr for s in result.per_image], [s.mos for s in result.per_image])
    assert result.srcc == rho


def test_per_image_scores_match_library_calls(manifest, degradation_set, bundle, fixtures_dir):
    result = evaluate_biqa(manifest, degradation_set, bundle.image_session)
    record = result.per_image[0]
    feature = encode_image(
        bundle.image_session, preprocess(load_image(fixtures_dir / record.path))
    )
    assert record.q_ddr == quality_score(feature, degradation_set)


def test_order_invariance(manifest, degradation_set, bundle):
    base = evaluate_biqa(manifest, degradation_set, bundle.image_session)
    shuffled = DatasetManifest(
        dataset_id=manifest.dataset_id,
        records=tuple(reversed(manifest.records)),
        root=manifest.root,
    )
    other = evaluate_biqa(shuffled, degradation_set, bundle.image_session)
    assert other.srcc == base.srcc
    by_path = {s.path: s.q_ddr for s in other.per_image}
    for s in base.per_image:
        assert by_path[s.path] == s.q_ddr


def test_parallel_matches_serial(manifest, degradation_set, bundle):
    serial = evaluate_biqa(manifest, degradation_set, bundle.image_session, parallelism=1)
    parallel = evaluate_biqa(manifest, degradation_set, bundle.image_session, parallelism=4)
    assert serial.srcc == parallel.srcc
    for a, b in zip(serial.per_image, parallel.per_image):
        assert a.path == b.path and a.q_ddr == b.q_ddr


def test_failures_collected_but_run_proceeds(manifest, degradation_set, bundle):
    records = manifest.records + (ManifestRecord("does_not_exist.png", 40.0),)
    patched = DatasetManifest(
        dataset_id="with-failure", records=records, root=manifest.root
    )
    result = evaluate_biqa(patched, degradation_set, bundle.image_session)
    assert result.n_images == 5
    assert len(result.failures) == 1
    assert result.failures[0].path == "does_not_exist.png"


def test_all_failures_raise_data_error(degradation_set, bundle, tmp_path):
    bad = DatasetManifest(
        dataset_id="all-bad",
        records=(ManifestRecord("a.png", 1.0), ManifestRecord("b.png", 2.0)),
        root=tmp_path,
    )
    with pytest.raises(DataError, match="need at least 2"):
        evaluate_biqa(bad, degradation_set, bundle.image_session)


def test_two_record_manifest_srcc_is_plus_minus_one(manifest, degradation_set, bundle):
    two = DatasetManifest(
        dataset_id="pair", records=manifest.records[:2], root=manifest.root
    )
    result = evaluate_biqa(two, degradation_set, bundle.image_session)
    assert result.srcc in (1.0, -1.0)


def test_correlation_table_structure(manifest, degradation_set, bundle):
    table = correlate_descriptors(manifest, degradation_set, bundle.image_session)
    assert len(table.rows) == 4
    doc = table.to_dict()
    for row in doc["rows"]:
        for col in ("colorfulness", "sharpness", "quality"):
            assert -1.0 <= row[col] <= 1.0
    assert table.n_images == 5


def test_objective_linearity_in_each_term(manifest, degradation_set, bundle, fixtures_dir):
    restored = load_image(fixtures_dir / "images" / "img_01.png")
    gt = load_image(fixtures_dir / "images" / "img_02.png")
    breakdown = objective_breakdown(
        restored, gt, degradation_set, bundle.image_session, lambda_d=2.0
    )
    assert math.isfinite(breakdown.objective)
    # objective = reconstruction - lambda * sum(terms), exactly
    expected = breakdown.reconstruction - 2.0 * sum(breakdown.ddr_terms.values())
    assert breakdown.objective == pytest.approx(expected, abs=1e-12)
    # removing the weight recovers the reconstruction term
    zero = ddr_objective(restored, gt, degradation_set, bundle.image_session, lambda_d=0.0)
    assert zero == pytest.approx(breakdown.reconstruction, abs=1e-12)


def test_objective_identical_pair(manifest, degradation_set, bundle, fixtures_dir):
    img = load_image(fixtures_dir / "images" / "img_03.png")
    breakdown = objective_breakdown(
        img, img.copy(), degradation_set, bundle.image_session
    )
    assert breakdown.identical_inputs
    assert breakdown.objective == -math.inf
    assert all(v > 0 for v in breakdown.ddr_terms.values())


def test_objective_rejects_negative_lambda(manifest, degradation_set, bundle, fixtures_dir):
    img = load_image(fixtures_dir / "images" / "img_01.png")
    with pytest.raises(DataError):
        ddr_objective(img, img, degradation_set, bundle.image_session, lambda_d=-1.0)
