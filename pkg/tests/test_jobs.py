import json
from pathlib import Path

import pytest

import src.jobs as jobs
from src.errors import INPUT_EXIT_CODE, ParseError, SchemaError, VerificationFailure
from src.exactnum import CycloValue
from src.jobs import JobRunner, PresentationTable, canonical_json, error_document, input_sha256, parse_job, run_job

JOB_DIR = Path(__file__).resolve().parents[1] / "data" / "jobs"
JOB_FILES = sorted(p for p in JOB_DIR.glob("*.toml") if not p.stem.endswith("_slow"))

SEMION_JOB = """
command = "milgram"

[metric_group]
factors = [2]
q_diag = ["1/4"]
"""


def test_parse_milgram_job():
    job = parse_job(SEMION_JOB)
    assert job.command == "milgram"
    assert job.metric_group.factors == [2]
    assert job.canonical() == {"command": "milgram", "metric_group": {"factors": [2], "q_diag": ["1/4"], "b_off": []}}


def test_milgram_result():
    out = run_job(parse_job(SEMION_JOB))
    assert out["result"]["signature"] == 1
    assert out["result"]["order"] == 2
    assert out["checks"] == {}
    assert len(out["input_sha256"]) == 64
    verified = run_job(parse_job(SEMION_JOB), verify=True)
    assert verified["checks"] == {"closed_form_expands_to_sum": True}


def test_hash_ignores_layout():
    reordered = """
[metric_group]
q_diag = [ "1/4" ]
factors = [ 2 ]

command = "milgram"   # semion
"""
    assert input_sha256(parse_job(SEMION_JOB)) == input_sha256(parse_job(reordered))
    other = SEMION_JOB.replace("1/4", "3/4")
    assert input_sha256(parse_job(SEMION_JOB)) != input_sha256(parse_job(other))


def test_canonical_json_is_sorted():
    assert canonical_json({"b": 1, "a": [1, 2]}) == '{"a":[1,2],"b":1}'


def test_parse_error_reports_line():
    with pytest.raises(ParseError) as info:
        parse_job('command = "milgram"\n[metric_group\n')
    assert info.value.details["line"] == 2
    assert info.value.exit_code == INPUT_EXIT_CODE


def test_schema_errors():
    with pytest.raises(SchemaError) as info:
        parse_job('command = "rt3"\n[metric_group]\nfactors = [2]\nq_diag = ["1/4"]\n[surgery]\nlinking = [[0, 1], [2, 0]]\n')
    assert info.value.details["errors"][0]["line"] == 6
    with pytest.raises(SchemaError):
        parse_job(SEMION_JOB.replace("1/4", "2/8"))
    with pytest.raises(SchemaError) as info:
        parse_job(SEMION_JOB + "colour = 1\n")
    assert info.value.details["errors"][0]["loc"] == "metric_group.colour"
    with pytest.raises(SchemaError):
        parse_job('command = "unknown"\n')
    with pytest.raises(SchemaError):
        parse_job('command = "milgram"\n')
    with pytest.raises(SchemaError):
        parse_job(SEMION_JOB + '[group]\nname = "S3"\n')
    with pytest.raises(SchemaError):
        parse_job('command = "groupoid-card"\n')


def test_dim1_and_anomaly_values():
    out = run_job(parse_job('command = "dim1"\n[group]\nname = "Z4"\n[character]\nvalues = ["0", "0", "0", "0"]\n'))
    assert out["result"]["value"] == "1/1"
    out = run_job(parse_job('command = "anomaly4"\n[metric_group]\nlattice = "A1"\n[fourmanifold]\nname = "S4"\n'))
    assert out["result"]["exact"]["rational"] == "2/1"
    assert out["checks"]["sum_equals_closed_form"]


def test_groupoid_card_from_tower():
    out = run_job(parse_job('command = "groupoid-card"\n[pitower]\ncomponents = [[2], [3, 4], [1]]\n'))
    assert out["result"]["cardinality"] == "17/6"
    out = run_job(parse_job('command = "groupoid-card"\n[groupoid]\ngroup = "S3"\nset = "self-conj"\n'))
    assert out["result"]["cardinality"] == "1/1"
    assert out["checks"] == {"objects_over_group_order": True}


def test_verify_raises_on_failed_check(monkeypatch):
    monkeypatch.setattr(jobs, "gauss_sum", lambda M: CycloValue.rational(0))
    job = parse_job(SEMION_JOB)
    assert run_job(job)["result"]["signature"] == 1
    with pytest.raises(VerificationFailure) as info:
        JobRunner(verify=True).run_job(job)
    assert info.value.details["checks"] == {"closed_form_expands_to_sum": False}


Z2_PRESENTATION_JOB = """
command = "dw3"

[group]
name = "Z2"

[presentation]
generators = 1
relators = RELATORS
"""


def presentation_job(relators):
    return Z2_PRESENTATION_JOB.replace("RELATORS", relators)


def test_flat_relators():
    flat = parse_job(presentation_job("[[0, 2]]"))
    nested = parse_job(presentation_job("[[[0, 2]]]"))
    assert flat.presentation.relators == [[(0, 2)]]
    assert input_sha256(flat) == input_sha256(nested)
    assert run_job(flat)["result"]["value"] == "1/1"
    two_letters = parse_job(presentation_job("[[0, 1, 0, 1]]"))
    assert two_letters.presentation.relators == [[(0, 1), (0, 1)]]
    with pytest.raises(SchemaError):
        parse_job(presentation_job("[[0, 2, 0]]"))


def test_relator_generator_out_of_range():
    with pytest.raises(SchemaError) as info:
        parse_job(presentation_job("[[[5, 2]]]"))
    assert info.value.exit_code == INPUT_EXIT_CODE
    assert info.value.details["errors"][0]["loc"] == "presentation"
    with pytest.raises(SchemaError):
        parse_job(presentation_job("[[5, 2]]"))
    job = parse_job(presentation_job("[]"))
    unchecked = job.model_copy(update={"presentation": PresentationTable.model_construct(generators=1, relators=[[(5, 2)]])})
    with pytest.raises(SchemaError) as info:
        JobRunner().run_job(unchecked)
    doc = error_document(info.value, "dw3")
    assert doc["error"]["code"] == "schema_error"
    assert info.value.exit_code == INPUT_EXIT_CODE


def test_error_document():
    doc = error_document(SchemaError("bad"), "rt3")
    assert doc["command"] == "rt3"
    assert doc["error"] == {"code": "schema_error", "message": "bad"}


@pytest.mark.parametrize("path", JOB_FILES, ids=lambda p: p.stem)
def test_shipped_jobs_verify(path):
    job = parse_job(path.read_text(encoding="utf-8"))
    out = run_job(job, verify=True)
    assert out["command"] == job.command
    assert all(out["checks"].values())
    json.dumps(out)
