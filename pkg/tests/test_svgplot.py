"""Chart writer: deterministic bytes and well-formed markup."""

from __future__ import annotations

import re

import pytest

from lidscope.svgplot import box_chart, line_chart


def test_line_chart_bytes_are_reproducible(tmp_path):
    series = [
        ("mean", [0.0, 1.0, 2.0], [3.0, 2.5, 2.7]),
        ("median", [0.0, 1.0, 2.0], [2.9, 2.4, 2.6]),
    ]
    paths = []
    for name in ("a.svg", "b.svg"):
        path = tmp_path / name
        line_chart(path, series, title="t", x_label="x", y_label="y")
        paths.append(path)
    first, second = (p.read_bytes() for p in paths)
    assert first == second
    text = first.decode("utf-8")
    assert text.startswith("<svg")
    assert text.rstrip().endswith("</svg>")
    assert "polyline" in text
    assert "mean" in text and "median" in text
    # nothing time- or environment-dependent may leak into the markup
    assert not re.search(r"\d{4}-\d{2}-\d{2}", text)


def test_line_chart_handles_constant_series(tmp_path):
    path = tmp_path / "flat.svg"
    line_chart(path, [("flat", [0.0, 1.0], [2.0, 2.0])], title="", x_label="", y_label="")
    assert path.read_text().startswith("<svg")


def test_line_chart_escapes_markup_in_labels(tmp_path):
    path = tmp_path / "esc.svg"
    line_chart(
        path,
        [("a<b>&c", [0.0, 1.0], [0.0, 1.0])],
        title="x < y & z", x_label="", y_label="",
    )
    text = path.read_text()
    assert "a&lt;b&gt;&amp;c" in text
    assert "<b>" not in text


def test_box_chart_renders_groups(tmp_path):
    path = tmp_path / "box.svg"
    box_chart(
        path,
        [("g1", 1.0, 1.5, 2.0, 2.5, 3.0), ("g2", 2.0, 2.2, 2.4, 2.6, 2.8)],
        title="spread", y_label="estimate",
    )
    text = path.read_text()
    assert text.startswith("<svg")
    assert "g1" in text and "g2" in text


def test_chart_argument_validation(tmp_path):
    with pytest.raises(ValueError):
        line_chart(tmp_path / "x.svg", [], title="", x_label="", y_label="")
    with pytest.raises(ValueError):
        line_chart(tmp_path / "x.svg", [("s", [], [])], title="", x_label="", y_label="")
    with pytest.raises(ValueError):
        box_chart(tmp_path / "x.svg", [], title="", y_label="")
