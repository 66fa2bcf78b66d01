import json
import os

import numpy as np
import pytest

from reslevy.reporting import make_header, read_body, to_jsonable, write_csv, write_json


@pytest.fixture
def header():
    return make_header(1, {"grid_dt": 1e-3}, "lifetime", timestamp="2026-01-01T00:00:00+00:00")


class TestJson:
    def test_sorted_and_converted(self, tmp_path, header):
        path = tmp_path / "r.json"
        write_json(str(path), header, {"b": np.float64(1.5), "a": [np.int64(2), np.nan, np.inf], "ok": np.bool_(True)})
        doc = json.loads(path.read_text())
        assert doc["results"] == {"a": [2, None, "inf"], "b": 1.5, "ok": True}
        assert path.read_text().index('"a"') < path.read_text().index('"b"')
        assert doc["header"]["seed"] == 1 and doc["header"]["version"]

    def test_enum(self):
        from reslevy.analytics import Verdict

        assert to_jsonable(Verdict.ABSORBED) == "AbsorbedAS"


class TestCsv:
    def test_header_and_format(self, tmp_path, header):
        path = tmp_path / "r.csv"
        write_csv(str(path), header, ["x", "y"], [(1, 0.5), (2, float("nan"))])
        text = path.read_bytes().decode()
        assert "\r" not in text
        lines = text.splitlines()
        assert lines[0].startswith("# ") and "# seed: 1" in lines and "# tolerance.grid_dt: 0.001" in lines
        assert lines[-3:] == ["x,y", "1,0.5", "2,nan"]

    def test_body_ignores_timestamp(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        write_csv(str(a), make_header(1, {}, "c", "t1"), ["x"], [(1,)])
        write_csv(str(b), make_header(1, {}, "c", "t2"), ["x"], [(1,)])
        assert a.read_text() != b.read_text() and read_body(str(a)) == read_body(str(b))


class TestAtomic:
    def test_no_temp_files_left(self, tmp_path, header):
        write_json(str(tmp_path / "x.json"), header, {})
        assert os.listdir(tmp_path) == ["x.json"]

    def test_unwritable(self, tmp_path, header):
        blocker = tmp_path / "file"
        blocker.write_text("")
        with pytest.raises(OSError):
            write_json(str(blocker / "x.json"), header, {})
