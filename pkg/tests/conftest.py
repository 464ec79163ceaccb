"""Shared test fixtures for the test suite"""

import copy

import pytest
from src.core.models import BasisIndexing, IndexingKind
from src.repositories.memory import InMemoryReportRepository
from src.services.experiment import ExperimentService
from src.services.space import build_scheme

BASE_CONFIG = {
    "space": {"indexing": "natural", "truncation_dims": [16]},
    "scheme": {"L": 4, "net_depth": 0, "seed": 7},
    "family": {"kind": "right_shift_powers", "n_max": 10},
    "analyses": [{"kind": "banded", "K": 0}],
}


@pytest.fixture
def natural16():
    """Natural-indexed truncation of dimension 16"""
    return BasisIndexing(IndexingKind.NATURAL, 16)


@pytest.fixture
def integer128():
    """Fourier (Z-indexed) truncation of dimension 128"""
    return BasisIndexing(IndexingKind.INTEGER, 128)


@pytest.fixture
def scheme16(natural16):
    """Scheme with a 1-net for F_1 on the natural truncation"""
    return build_scheme(natural16, L=4, net_depth=1, seed=3)


@pytest.fixture
def scheme128(integer128):
    """Scheme on the Fourier truncation, no nets"""
    return build_scheme(integer128, L=8, net_depth=0, seed=5)


@pytest.fixture
def memory_repository():
    """Create an in-memory report repository"""
    return InMemoryReportRepository()


@pytest.fixture
def experiment_service(memory_repository):
    """Create ExperimentService backed by the in-memory repository"""
    return ExperimentService(memory_repository)


@pytest.fixture
def config_document():
    """Fresh copy of a small valid config document"""
    return copy.deepcopy(BASE_CONFIG)
