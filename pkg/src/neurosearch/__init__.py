"""Closed-loop SSVEP speller and search simulator.

Subpackages cover stimulus coding, synthetic EEG, CCA target recognition,
differential-entropy features, boosted satisfaction prediction, pinyin query
suggestion, SERP re-ranking, and the session service tying them together.
"""

__version__ = "0.1.0"
