import numpy as np
import pytest

from admmlp.core.base import BaseModel, MutableModel


class Point(BaseModel):
    x: int
    y: int = 0


class Counter(MutableModel):
    count: int = 0
    values: np.ndarray


def test_to_dict():
    """Test converting a model to a dict"""
    assert Point(x=1, y=2).to_dict() == {"x": 1, "y": 2}


def test_to_dict_ignore():
    """Test excluding fields when converting to a dict"""
    assert Point(x=1, y=2).to_dict(ignore=["y"]) == {"x": 1}


def test_base_model_is_frozen():
    """Test that fields of a BaseModel cannot be reassigned"""
    point = Point(x=1)
    with pytest.raises((TypeError, ValueError)):
        point.x = 2


def test_mutable_model_allows_assignment():
    """Test that a MutableModel can be updated in place"""
    counter = Counter(values=np.zeros(3))
    counter.count += 1
    counter.values = np.ones(3)
    assert counter.count == 1
    assert counter.values.sum() == 3


def test_arbitrary_types_are_checked():
    """Test that numpy fields reject other types"""
    with pytest.raises(ValueError):
        Counter(values=[1, 2, 3])
