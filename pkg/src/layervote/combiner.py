"""Majority vote with confidence: the single combination rule of both layers.

Given votes (label, softmax score) from several predictors:

1. If some label is held by a *strict* majority (> n/2 voters, not a mere
   plurality), return it.  The winning vote's confidence is the maximum
   score among the voters holding that label.
2. Otherwise fall back to the single vote with the highest confidence;
   exact confidence ties break to the earliest voter in list order.

The same rule combines runs of one architecture into a first-layer ensemble
and first-layer ensembles of different architectures into a second-layer
ensemble.  Member order is init_index order at layer 1 and lexicographic
model order at layer 2, which pins every tie deterministically.

All functions here are pure and safe to call concurrently.
"""

from dataclasses import dataclass

from .errors import (
    EmptyVoteListError,
    IndexOutOfRangeError,
    MissingMemberVoteError,
    MissingRunError,
)
from .prediction_store import PredictionRun, RunId, RunSet, Vote, argmax_vote

MAJORITY_CONF_MAX = "max"
MAJORITY_CONF_MEAN = "mean"
FIRST_LAYER_VOTE = "vote"
FIRST_LAYER_MEAN_DISTRIBUTION = "mean_distribution"


@dataclass(frozen=True)
class CombinePolicy:
    """Knobs for the parts of the rule the published description leaves open.

    ``majority_confidence`` decides which score a majority winner carries:
    the maximum over its supporters (default) or their mean.
    ``first_layer_mode`` selects between combining member argmax votes
    (default) and averaging the members' full distributions before taking
    the argmax.  Defaults are the configuration used everywhere in the
    shipped reports.
    """

    majority_confidence: str = MAJORITY_CONF_MAX
    first_layer_mode: str = FIRST_LAYER_VOTE

    def __post_init__(self):
        if self.majority_confidence not in (MAJORITY_CONF_MAX, MAJORITY_CONF_MEAN):
            raise ValueError(f"unknown majority_confidence {self.majority_confidence!r}")
        if self.first_layer_mode not in (FIRST_LAYER_VOTE, FIRST_LAYER_MEAN_DISTRIBUTION):
            raise ValueError(f"unknown first_layer_mode {self.first_layer_mode!r}")


DEFAULT_POLICY = CombinePolicy()


def strict_majority(votes: list[Vote] | tuple[Vote, ...], policy: CombinePolicy = DEFAULT_POLICY) -> Vote | None:
    """The strict-majority winner, or None when no label clears n/2.

    Useful on its own when the confidence fallback must stay out of the
    picture (e.g. against closed-form majority baselines).
    """
    if not votes:
        raise EmptyVoteListError("no votes to combine")
    counts: dict[str, int] = {}
    for vote in votes:
        counts[vote.label] = counts.get(vote.label, 0) + 1
    threshold = len(votes) / 2
    for label, count in counts.items():
        if count > threshold:
            supporters = [v.confidence for v in votes if v.label == label]
            if policy.majority_confidence == MAJORITY_CONF_MEAN:
                return Vote(label, sum(supporters) / len(supporters))
            return Vote(label, max(supporters))
    return None


def majority_vote_with_confidence(
    votes: list[Vote] | tuple[Vote, ...],
    policy: CombinePolicy = DEFAULT_POLICY,
) -> Vote:
    """Combine votes per the rule in the module docstring."""
    winner = strict_majority(votes, policy)
    if winner is not None:
        return winner
    best = votes[0]
    for vote in votes[1:]:
        if vote.confidence > best.confidence:
            best = vote
    return best


@dataclass(frozen=True)
class FirstLayerEnsemble:
    """Several trainings of one architecture, ordered by init_index."""

    model_id: str
    member_run_ids: tuple[RunId, ...]

    def __post_init__(self):
        if not self.member_run_ids:
            raise ValueError("first-layer ensemble needs at least one run")
        for run_id in self.member_run_ids:
            if run_id.model_id != self.model_id:
                raise ValueError(f"member {run_id} does not belong to model {self.model_id!r}")
        indices = [r.init_index for r in self.member_run_ids]
        if indices != sorted(indices):
            raise ValueError("member runs must be ordered by init_index")

    @classmethod
    def for_model(cls, runs: RunSet, model_id: str) -> "FirstLayerEnsemble":
        group = runs.by_model.get(model_id)
        if not group:
            raise MissingRunError(f"no runs for model {model_id!r}")
        return cls(model_id=model_id, member_run_ids=tuple(r.run_id for r in group))


@dataclass(frozen=True)
class SecondLayerEnsemble:
    """A set of two or more distinct architectures, stored sorted."""

    member_model_ids: tuple[str, ...]

    def __post_init__(self):
        if len(set(self.member_model_ids)) != len(self.member_model_ids):
            raise ValueError("second-layer members must be distinct")
        ordered = tuple(sorted(self.member_model_ids))
        if ordered != self.member_model_ids:
            object.__setattr__(self, "member_model_ids", ordered)

    def __len__(self) -> int:
        return len(self.member_model_ids)


def _member_runs(ensemble: FirstLayerEnsemble, runs: RunSet) -> list[PredictionRun]:
    members = []
    for run_id in ensemble.member_run_ids:
        try:
            members.append(runs.run(run_id))
        except KeyError:
            raise MissingRunError(f"run {run_id} not present in run set") from None
    return members


def first_layer_predict(
    ensemble: FirstLayerEnsemble,
    runs: RunSet,
    example_index: int,
    policy: CombinePolicy = DEFAULT_POLICY,
) -> Vote:
    """Combine the member runs' predictions for one example."""
    members = _member_runs(ensemble, runs)
    if not 0 <= example_index < members[0].n_examples:
        raise IndexOutOfRangeError(f"example index {example_index} out of range")
    if policy.first_layer_mode == FIRST_LAYER_MEAN_DISTRIBUTION:
        mean_row = sum(run.matrix[example_index] for run in members) / len(members)
        col = int(mean_row.argmax())
        return Vote(members[0].labels.labels[col], float(mean_row[col]))
    votes = [argmax_vote(run, example_index) for run in members]
    return majority_vote_with_confidence(votes, policy)


def second_layer_predict(
    ensemble: SecondLayerEnsemble,
    first_layer_votes: dict[str, Vote],
    policy: CombinePolicy = DEFAULT_POLICY,
) -> Vote:
    """Combine member first-layer votes, in lexicographic member order."""
    votes = []
    for model_id in ensemble.member_model_ids:
        try:
            votes.append(first_layer_votes[model_id])
        except KeyError:
            raise MissingMemberVoteError(f"no first-layer vote for {model_id!r}") from None
    return majority_vote_with_confidence(votes, policy)
