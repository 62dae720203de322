import numpy as np
import pytest

from sepprofiles.errors import ValidationError
from sepprofiles.streams import run_trials, trial_rng


def draws(seed, start, stop, size=3):
    return np.stack([trial_rng(seed, r).integers(0, 2**62, size=size) for r in range(start, stop)])


def test_trial_streams_reproducible_and_distinct():
    a = trial_rng(5, 10).random(4)
    assert np.array_equal(a, trial_rng(5, 10).random(4))
    assert not np.array_equal(a, trial_rng(5, 11).random(4))
    assert not np.array_equal(a, trial_rng(6, 10).random(4))
    assert not np.array_equal(a, trial_rng(5, 10, stream=1).random(4))


def test_trial_streams_do_not_overlap_early():
    first = {int(trial_rng(0, r).integers(0, 2**63)) for r in range(2000)}
    assert len(first) == 2000


@pytest.mark.parametrize("workers", [2, 3, 8])
def test_worker_count_does_not_change_results(workers):
    serial = run_trials(draws, 37, seed=3)
    parallel = run_trials(draws, 37, seed=3, workers=workers)
    assert np.array_equal(serial, parallel)


def test_invalid_arguments():
    with pytest.raises(ValidationError):
        run_trials(draws, 0, seed=1)
    with pytest.raises(ValidationError):
        run_trials(draws, 5, seed=1, workers=0)
    with pytest.raises(ValidationError):
        trial_rng(-1, 0)
