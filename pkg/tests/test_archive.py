import json
from fractions import Fraction

import pytest
from sqlalchemy.orm import sessionmaker

from latcover.commands.search import _archive
from latcover.database import init_db, make_engine
from latcover.dependencies import archive_session
from latcover.lattice_cover import hadwiger_audit, is_covering
from latcover.main import run
from latcover.models import AuditRecord, SearchRun
from latcover.optimizer import SearchResult
from latcover.schemas import SearchConfig, SearchRunResponse


@pytest.fixture
def db():
    engine = make_engine("sqlite://")
    init_db(engine)
    session = sessionmaker(autocommit=False, autoflush=False, bind=engine)()
    try:
        yield session
    finally:
        session.close()


@pytest.fixture
def fary_result(triangle, fary_lattice):
    cert = is_covering(triangle, fary_lattice, max_depth=8)
    return SearchResult(
        best_basis=fary_lattice.basis,
        best_density=Fraction(3, 2),
        certificate=cert,
        history=[(0, 1.6), (1, 1.5)],
        label="congruence m=3 v=(1, 2) k=1",
        audits=[hadwiger_audit(triangle, fary_lattice, cert)],
        target=Fraction(3, 2),
    )


def test_archive_stores_run_and_audit_rows(db, fary_result):
    cfg = SearchConfig(dim=2, seed=5)
    run_row = _archive(db, cfg, fary_result)

    assert run_row.id is not None
    assert run_row.best_density == "3/2"
    assert run_row.best_density_decimal == "1.5"
    assert run_row.verdict == "Covered"
    assert json.loads(run_row.basis) == [[[2, 3], [-1, 3]], [[-1, 3], [2, 3]]]
    assert json.loads(run_row.config)["seed"] == 5

    records = db.query(AuditRecord).filter(AuditRecord.run_id == run_row.id).all()
    assert [r.check for r in records] == ["star_number_bound"]
    assert records[0].report == "hadwiger"
    assert records[0].satisfied is True


def test_deleting_a_run_removes_its_records(db, fary_result):
    run_row = _archive(db, SearchConfig(dim=2), fary_result)
    db.delete(run_row)
    db.commit()
    assert db.query(SearchRun).count() == 0
    assert db.query(AuditRecord).count() == 0


def test_run_response_schema(db, fary_result):
    run_row = _archive(db, SearchConfig(dim=2), fary_result)
    response = SearchRunResponse.model_validate(run_row)
    assert response.method == "nelder-mead"
    assert len(response.records) == 1
    assert response.records[0].kind == "check"


def test_runs_command_lists_archived_runs(capsys, tmp_path, fary_result):
    url = f"sqlite:///{tmp_path / 'runs.db'}"
    with archive_session(url) as session:
        first = _archive(session, SearchConfig(dim=2, seed=1), fary_result).id
        _archive(session, SearchConfig(dim=2, seed=2), fary_result)

    assert run(["runs", "--archive-url", url]) == 0
    listed = json.loads(capsys.readouterr().out)["result"]
    assert len(listed) == 2
    assert {r["seed"] for r in listed} == {1, 2}

    assert run(["runs", "--archive-url", url, "--id", str(first)]) == 0
    single = json.loads(capsys.readouterr().out)
    assert single["id"] == first
    assert single["records"][0]["check"] == "star_number_bound"

    assert run(["runs", "--archive-url", url, "--id", "999"]) == 1


def test_runs_are_listed_by_numeric_density(capsys, tmp_path, fary_result):
    url = f"sqlite:///{tmp_path / 'runs.db'}"
    with archive_session(url) as session:
        # "10.5" sorts before "2.25" as text
        for seed, density in ((1, Fraction(21, 2)), (2, Fraction(9, 4)), (3, Fraction(3, 2))):
            fary_result.best_density = density
            _archive(session, SearchConfig(dim=2, seed=seed), fary_result)

    assert run(["runs", "--archive-url", url]) == 0
    listed = json.loads(capsys.readouterr().out)["result"]
    assert [r["best_density_decimal"] for r in listed] == ["1.5", "2.25", "10.5"]
    assert [r["density_value"] for r in listed] == [1.5, 2.25, 10.5]

    assert run(["runs", "--archive-url", url, "--limit", "1"]) == 0
    assert json.loads(capsys.readouterr().out)["result"][0]["seed"] == 3
