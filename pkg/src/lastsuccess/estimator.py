"""scikit-learn style front end for the threshold stopping rule.

``OddsStopper`` is fitted either on known success probabilities or on a 0/1
outcome matrix (rows are observed sequences, columns are trials), predicts
where the rule stops on new sequences, and scores by empirical win rate.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .core import Decision, solve, validate_instance
from .montecarlo import Game


def _check_outcomes(X, n_trials=None):
    X = check_array(X, dtype=None, ensure_2d=True)
    if not np.isin(X, (0, 1)).all():
        raise ValueError("outcome matrix must contain only 0/1 values")
    X = X.astype(bool)
    if n_trials is not None and X.shape[1] != n_trials:
        raise ValueError(f"X has {X.shape[1]} trials, the stopper was fitted on {n_trials}")
    return X


class OddsStopper(BaseEstimator):
    """Optimal threshold rule for the last-success problem.

    Parameters
    ----------
    probs : array-like of shape (n_trials,), default=None
        Known success probabilities. When None, ``fit`` estimates them as the
        column means of ``X``.
    game : {"standard", "variant1", "variant2"}, default="standard"
        Rules used by :meth:`score`.

    Attributes
    ----------
    probs_ : ndarray of shape (n_trials,)
    threshold_ : int
        1-based optimal threshold.
    solution_ : Solution
    n_features_in_ : int
    """

    def __init__(self, probs=None, game="standard"):
        self.probs = probs
        self.game = game

    def fit(self, X=None, y=None):
        if self.probs is not None:
            probs = check_array(np.asarray(self.probs, dtype=float).reshape(1, -1)).ravel()
        else:
            if X is None:
                raise ValueError("either probs or an outcome matrix X is required")
            probs = _check_outcomes(X).mean(axis=0)
        inst = validate_instance(probs.tolist())
        Game(self.game)
        self.solution_ = solve(inst)
        self.probs_ = np.asarray(inst.probs)
        self.threshold_ = self.solution_.threshold
        self.n_features_in_ = inst.n
        return self

    def predict(self, X):
        """1-based stopping index for each row; 0 where the rule never stops."""
        check_is_fitted(self)
        X = _check_outcomes(X, self.n_features_in_)
        window = X[:, self.threshold_ - 1 :]
        stopped = window.any(axis=1)
        return np.where(stopped, self.threshold_ + np.argmax(window, axis=1), 0)

    def _wins(self, X):
        stop = self.predict(X)
        n = X.shape[1]
        has_one = X.any(axis=1)
        last_one = np.where(has_one, n - np.argmax(X[:, ::-1], axis=1), 0)
        return (stop > 0) & (stop == last_one), has_one

    def score(self, X, y=None):
        """Empirical win rate of the fitted rule on the sequences in ``X``.

        ``variant1`` ignores all-zero rows (they would be replayed);
        ``variant2`` counts all-zero rows as wins when the fitted decision is
        to predict that no success occurs.
        """
        check_is_fitted(self)
        X = _check_outcomes(X, self.n_features_in_)
        wins, has_one = self._wins(X)
        game = Game(self.game)
        if game is Game.VARIANT_I:
            if not has_one.any():
                return float("nan")
            return float(wins[has_one].mean())
        if game is Game.VARIANT_II and self.solution_.variant2_decision is Decision.PREDICT_NO_ONES:
            return float((~has_one).mean())
        return float(wins.mean())

    def expected_score(self):
        """Exact win probability of the fitted rule under ``game``."""
        check_is_fitted(self)
        game = Game(self.game)
        if game is Game.VARIANT_I:
            return self.solution_.variant1_value
        if game is Game.VARIANT_II:
            return self.solution_.variant2_value
        return self.solution_.value
