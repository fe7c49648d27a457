from app.harness.evaluation import classification_table, classification_trial, evaluate_classification, mission_batch
from app.harness.render import render_frame, render_run

__all__ = ['classification_table', 'classification_trial', 'evaluate_classification', 'mission_batch',
           'render_frame', 'render_run']
