"""
Extractive summaries with topic-aware MMR
=========================================

Greedy selection that trades off query relevance, redundancy and similarity
to the main topic and subtopic, then trims to the character budget.
"""

from minutesum.corpus import load_corpus, load_tasks
from minutesum.embedding import NgramEmbedder
from minutesum.metrics import rouge1_recall
from minutesum.summarizer import MmrConfig, key_size, summarize_task
from minutesum.synthetic import fixture_path

corpus = load_corpus(fixture_path("fixture_minutes.jsonl"))
tasks = load_tasks(fixture_path("fixture_tasks.json"))
backend = NgramEmbedder(256)

print("sentences for 150 chars:", key_size(150), "for 100 chars:", key_size(100))

cfg = MmrConfig()
for task in tasks:
    out = summarize_task(corpus, task, backend, cfg)
    print(task.id, out.flags)
    print("  Q:", out.question_summary)
    print("  A:", out.answer_summary)
    ref = task.reference("answer")
    if ref:
        print("  answer recall", round(rouge1_recall(out.answer_summary, ref).recall, 3))

# Setting k=1 and m=s=0 gives plain MMR.
plain = summarize_task(corpus, tasks[1], backend, MmrConfig(k=1.0, m=0.0, s=0.0))
print(plain.selected_ids)
