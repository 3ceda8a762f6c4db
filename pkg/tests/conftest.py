import pytest
from hypothesis import HealthCheck, settings, strategies as st

from hubfp.formats import ConvFloat, FormatSpec, HubFloat

settings.register_profile("default", deadline=None, max_examples=200,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

SMALL = FormatSpec(4, 3)


@pytest.fixture
def small():
    return SMALL


def specs(max_exp=8, max_frac=12):
    return st.builds(FormatSpec, st.integers(2, max_exp), st.integers(1, max_frac))


@st.composite
def normals(draw, spec, cls=HubFloat):
    return cls(spec, draw(st.integers(0, 1)), draw(st.integers(1, spec.exp_all_ones - 1)),
               draw(st.integers(0, spec.frac_mask)))


@st.composite
def encodings(draw, spec, cls=HubFloat):
    """Any encoding, specials included, with the unused zero patterns read as zero."""
    return cls.from_bits(draw(st.integers(0, spec.encoding_count - 1)), spec, daz=True)


@st.composite
def spec_and_pair(draw, cls=HubFloat, max_exp=6, max_frac=10, normal=True):
    spec = draw(specs(max_exp, max_frac))
    gen = normals if normal else encodings
    return spec, draw(gen(spec, cls)), draw(gen(spec, cls))


def h(spec, sign, exp_field, frac):
    return HubFloat(spec, sign, exp_field, frac)


def c(spec, sign, exp_field, frac):
    return ConvFloat(spec, sign, exp_field, frac)


_CRITERIA: list[str] = []


@pytest.fixture
def criterion():
    """Record one ``PASS``/``FAIL`` line per acceptance criterion, then assert it."""
    def record(label: str, ok: bool, detail: str):
        line = f"{'PASS' if ok else 'FAIL'} criterion {label}: {detail}"
        _CRITERIA.append(line)
        print(line)
        assert ok, line
    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in _CRITERIA:
            terminalreporter.write_line(line)
