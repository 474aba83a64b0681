"""
Loading minutes and building summary tasks
==========================================

Read the bundled fixture, strip noise literals and look at the tasks.
"""

from minutesum.corpus import candidate_pool, clean_text, load_corpus, load_tasks
from minutesum.synthetic import fixture_path

# Noise literals such as applause markers are removed before anything else.
print(clean_text("ありがとうございました。（拍手）"))

corpus = load_corpus(fixture_path("fixture_minutes.jsonl"))
print(corpus)
for date, meeting in corpus.sessions():
    print(date, meeting, len(corpus.session(date, meeting)), "utterances")

# Each task names a session, a questioner, and character budgets.
tasks = load_tasks(fixture_path("fixture_tasks.json"))
task = tasks[0]
print(task.id, task.question_speaker, task.question_length, task.answer_length)
print(task.main_topic_segments())

# The candidate pool for a role is that speaker's utterances in the session.
for u in candidate_pool(corpus, task, "answer"):
    print(u.seq, u.speaker, u.text[:30])
