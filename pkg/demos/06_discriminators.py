#!/usr/bin/env python3
"""Three ways to rank candidate examples: rubric, scripted model, hybrid.

The loop needs an ordering over candidate example plans. The rubric ranks by
query difficulty; the model-based discriminator scores each plan 1-100 and
averages repeats; the hybrid merges both orderings with Borda counts. This
demo replays a scripted scorer so every number is reproducible offline.
"""

from planloop.discriminators import (
    SCORER_ROLE,
    _score_prompt,  # the exact prompt the scorer sees
    hybrid_select,
    llm_rank,
    llm_score_table,
    round_rankings,
    rubric_rank,
)
from planloop.fixtures import demo_candidates
from planloop.loop import default_evaluation_code
from planloop.metrics import worst_plan_avoidance
from planloop.models import ModelClient, script_transcript


def scripted_scorer(candidates, replies_per_candidate):
    code = default_evaluation_code()
    entries = []
    for candidate, replies in zip(candidates, replies_per_candidate):
        prompt = _score_prompt(candidate.plan, code)
        for reply in replies:
            entries.append((SCORER_ROLE, prompt, reply))
    return ModelClient(mode="replay", transcript=script_transcript(entries))


def main() -> None:
    candidates = demo_candidates()

    ranking = rubric_rank(candidates)
    print("rubric ranking (hardest training query first):")
    for plan_id, score in zip(ranking.ordered_plan_ids, ranking.scores):
        print(f"  {plan_id}: difficulty {score:.0f}")

    replies = [["62", "58"], ["71", "77"], ["90", "88"]]
    model = scripted_scorer(candidates, replies)
    model_ranking = llm_rank(candidates, default_evaluation_code(), model, repeats=2)
    print("\nscripted model ranking (two scoring rounds each):")
    for plan_id, score in zip(model_ranking.ordered_plan_ids, model_ranking.scores):
        print(f"  {plan_id}: average score {score:.1f}")

    table = llm_score_table(
        candidates, default_evaluation_code(),
        scripted_scorer(candidates, replies), repeats=2,
    )
    rounds = round_rankings(table)
    avoided, total = worst_plan_avoidance(rounds, ranking.ordered_plan_ids[-1])
    print(f"\nper-round orderings: {rounds}")
    print(f"worst-plan avoidance for {ranking.ordered_plan_ids[-1]!r}: "
          f"{avoided}/{total} rounds kept it off the top")

    winner = hybrid_select([ranking, model_ranking])
    print(f"\nhybrid Borda merge of both rankings selects: {winner}")
    overridden = hybrid_select([ranking, model_ranking], human_override="cand-a")
    print(f"with a human override: {overridden}")


if __name__ == "__main__":
    main()
