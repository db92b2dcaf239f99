import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pairconjoint import generate_design
from pairconjoint.core import ModelSpec
from pairconjoint.dataset import Dataset
from pairconjoint.errors import DomainError, EmptySegmentWarning, ParseError
from pairconjoint.estimator import fit_mnl
from pairconjoint.segments import (
    CELLS,
    SURVEY_CELL_COUNTS,
    Cell,
    Respondent,
    SegmentFilter,
    cell_of,
    filter_dataset,
    run_segment_pipeline,
)
from pairconjoint.simulate import simulate_population


def test_cell_of_examples():
    assert cell_of(Respondent("a", "F", 40, "Below10")) == Cell("F", "<=40", "Below10")
    assert cell_of(Respondent("b", "M", 41, "TenthPassOrMore")) == Cell("M", ">40", "TenthPassOrMore")
    assert cell_of(Respondent("c", "M", 18, "TenthPassOrMore")).age_side == "<=40"
    with pytest.raises(DomainError):
        Respondent("d", "X", 30, "Below10")


def test_survey_cell_counts():
    assert sum(SURVEY_CELL_COUNTS.values()) == 271
    assert sum(n for c, n in SURVEY_CELL_COUNTS.items() if c.gender == "F") == 111
    assert sum(n for c, n in SURVEY_CELL_COUNTS.items() if c.gender == "M") == 160
    assert tuple(SURVEY_CELL_COUNTS) == CELLS


def test_parse_filters():
    f = SegmentFilter.parse("gender=F,age=<=40,edu=Below10")
    assert f == SegmentFilter("F", "<=40", "Below10")
    assert SegmentFilter.parse("age=gt40") == SegmentFilter(age_side=">40")
    assert SegmentFilter.parse("").is_empty
    for bad in ("sex=F", "gender", "gender=Q", "age=50"):
        with pytest.raises(ParseError):
            SegmentFilter.parse(bad)


def test_gender_split_partitions_survey(survey_data):
    women = filter_dataset(survey_data, SegmentFilter(gender="F"))
    men = filter_dataset(survey_data, SegmentFilter(gender="M"))
    assert len(women.respondents) == 111 and len(men.respondents) == 160
    assert len(women.observations) + len(men.observations) == len(survey_data.observations)


def test_eight_cells_partition_survey(survey_data):
    seen = []
    for cell in CELLS:
        sub = filter_dataset(survey_data, SegmentFilter(*cell))
        assert len(sub.respondents) == SURVEY_CELL_COUNTS[cell]
        seen.extend(r.id for r in sub.respondents)
    assert sorted(seen) == sorted(r.id for r in survey_data.respondents)
    assert len(seen) == 271


def test_empty_segment_warns(survey_data):
    young = filter_dataset(survey_data, SegmentFilter(age_side="<=40"))
    with pytest.warns(EmptySegmentWarning):
        none = filter_dataset(young, SegmentFilter(age_side=">40"))
    assert not none.respondents
    with pytest.raises(DomainError), warnings.catch_warnings():
        warnings.simplefilter("ignore")
        run_segment_pipeline(young, SegmentFilter(age_side=">40"))


_FIELDS = st.builds(
    SegmentFilter,
    st.sampled_from([None, "F", "M"]),
    st.sampled_from([None, "<=40", ">40"]),
    st.sampled_from([None, "Below10", "TenthPassOrMore"]),
)


@settings(max_examples=30, deadline=None)
@given(_FIELDS, _FIELDS)
def test_filters_idempotent_and_commute(survey_data, f, g):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        once = filter_dataset(survey_data, f)
        assert filter_dataset(once, f) == once
        fg = filter_dataset(once, g)
        gf = filter_dataset(filter_dataset(survey_data, g), f)
    assert {r.id for r in fg.respondents} == {r.id for r in gf.respondents}
    assert set(fg.observations) == set(gf.observations)


def test_heterogeneous_segments_are_recovered():
    spec = ModelSpec.linear(range(3))
    design = generate_design(3, 3, 12, spec, np.random.default_rng(0))
    female_counts = [300, 300, 300, 300, 0, 0, 0, 0]
    male_counts = [0, 0, 0, 0, 300, 300, 300, 300]
    theta_f = np.array([1.5, 0.0, -0.5])
    theta_m = np.array([-0.5, 0.0, 1.0])
    cat = design.catalog
    women = simulate_population(cat, design, None, theta_f, spec, female_counts, seed=1)
    men = simulate_population(cat, design, None, theta_m, spec, male_counts, seed=2)
    rename = {r.id: "M" + r.id for r in men.respondents}
    merged = Dataset(
        cat,
        design,
        women.respondents + tuple(Respondent(rename[r.id], r.gender, r.age, r.education) for r in men.respondents),
        women.observations + tuple(o._replace(respondent=rename[o.respondent]) for o in men.observations),
    )
    fit_f = fit_mnl(filter_dataset(merged, SegmentFilter(gender="F")), spec)
    fit_m = fit_mnl(filter_dataset(merged, SegmentFilter(gender="M")), spec)
    pooled = fit_mnl(merged, spec)
    for fit, truth in ((fit_f, theta_f), (fit_m, theta_m)):
        assert np.all(np.abs(fit.estimates - truth) < 3 * fit.se)
    lo = np.minimum(fit_f.estimates, fit_m.estimates)
    hi = np.maximum(fit_f.estimates, fit_m.estimates)
    assert np.all((pooled.estimates >= lo - 0.05) & (pooled.estimates <= hi + 0.05))
