"""
Evaluation metrics
==================

Triplet diff and accuracy for embeddings, ROUGE-1 recall for summaries.
"""

from minutesum.metrics import diff_report, rouge1_recall

report = diff_report([0.8, 0.0, -0.4])
print(report.mean_diff, report.accuracy)
print(diff_report([0.8, 0.0, -0.4], strict=True).accuracy)

# Character unigrams by default; whitespace and noise literals do not count.
rep = rouge1_recall("都政運営について", "都政の運営（拍手）")
print(rep)
print(rouge1_recall("the cat sat", "the cat the dog", unit="token"))
