"""
Finding appliance events in an aggregate
========================================

An aggregate meter sees the sum of every appliance.  Steps in the smoothed
signal larger than a threshold are ON or OFF events; the samples between
an ON and the next OFF, minus the baseline before the ON, form a
signature that can be described and classified like any other.
"""

import numpy as np

from powerprint.eventdetect import detect_edges, segment_between, segments_to_signals

rng = np.random.default_rng(0)
x = 60 + rng.normal(0, 2, 900)          # always-on load with meter noise
x[100:180] += 2000                      # kettle
x[300:520] += 120                       # fridge compressor
x[650:700] += 1200                      # microwave
x[420] += 400                           # a one-sample glitch, removed by smoothing

events = detect_edges(x, threshold_watts=30, smooth_window=3)
for e in events:
    print(f"{e.kind:<3} at sample {e.index:>3}: {e.delta_watts:+8.1f} W")

segments = segment_between(x, events)
for s in segments:
    print(f"segment {s.start:>3}-{s.end:<3} {len(s):>3} samples, mean {s.samples.mean():7.1f} W above baseline")

signals = segments_to_signals(segments, source_id="house-1")
print("ready for description:", [sig.source_id for sig in signals])
