"""galleryflow: museum visitor analytics engine.

Cleans audio-guide event logs, segments visitors by behaviour, models
spatial flow with stair-aversion costs, analyses tour completion, scores
review sentiment, and generates synthetic corpora with planted structure for
validation.
"""

__version__ = "0.1.0"
