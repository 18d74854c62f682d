"""Shared fixtures: the four worked-example profiles and store helpers.

The corpus mirrors the running example used throughout the test suite:
two person profiles (P1, P2) that share the name John and an address
history at L1, and two location profiles (L1, L2) on Brown
Boulevard/Avenue.
"""

import sys

import pytest

from graphlink.model import (
    AttributeObject as A,
    Profile,
    ProvPair as PP,
    RelationObject as R,
    make_profile,
)


def build_p1() -> Profile:
    return make_profile(
        "P1",
        [
            A("type", "person"),
            A("name", "John"),
            A("name", "Peter", (PP("until", "1991"),)),
            A("sex", "m"),
        ],
        [
            R("lives_at", "L1", (PP("from", "1989"), PP("to", "1995"))),
            R("friend", "P2"),
            R("owns", "L1"),
        ],
    )


def build_p2() -> Profile:
    return make_profile(
        "P2",
        [
            A("type", "person"),
            A("name", "Bob"),
            A("name", "John", (PP("until", "1990"),)),
            A("bdate", "1980.12.12"),
        ],
        [
            R("lives_at", "L1", (PP("from", "1990"), PP("to", "2000"))),
            R("lives_at", "L2", (PP("from", "2001"),)),
            R("friend", "P1"),
        ],
    )


def build_l1() -> Profile:
    return make_profile(
        "L1",
        [
            A("type", "location"),
            A("numb", "1"),
            A("street", "Brown Blvd."),
            A("post", "2000"),
        ],
        [R("owned_by", "P1", (PP("from", "1989"),))],
    )


def build_l2() -> Profile:
    return make_profile(
        "L2",
        [
            A("type", "location"),
            A("numb", "69"),
            A("street", "Brown Ave."),
            A("post", "5000"),
        ],
    )


@pytest.fixture
def p1() -> Profile:
    return build_p1()


@pytest.fixture
def p2() -> Profile:
    return build_p2()


@pytest.fixture
def l1() -> Profile:
    return build_l1()


@pytest.fixture
def l2() -> Profile:
    return build_l2()


@pytest.fixture
def corpus(p1, p2, l1, l2) -> dict[str, Profile]:
    return {p.id: p for p in (p1, p2, l1, l2)}


def pytest_runtest_logreport(report):
    """One visible pass/fail line per acceptance criterion."""
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    status = "PASS" if report.passed else "FAIL"
    sys.stdout.write(f"\n[acceptance] {status} {name} ({report.duration:.1f}s)\n")
    sys.stdout.flush()
