"""Synthetic two-class corpora for desk-scale runs: noisy sines (label 0) vs white noise (label 1)."""
import numpy as np

from .ingestion import LabeledChunk, TimeSeries


def sine_chunk(rng, length, noise=0.1):
    period = rng.uniform(15.0, 60.0)
    phase = rng.uniform(0.0, 2 * np.pi)
    t = np.arange(length)
    return np.sin(2 * np.pi * t / period + phase) + noise * rng.normal(size=length)


def noise_chunk(rng, length):
    return rng.normal(size=length)


def sine_vs_noise(chunk_len, per_class, seed=0):
    rng = np.random.default_rng(seed)
    chunks = []
    for i in range(per_class):
        chunks.append(LabeledChunk(TimeSeries(sine_chunk(rng, chunk_len), f"sine{i}"), 0, "S", i))
    for i in range(per_class):
        chunks.append(LabeledChunk(TimeSeries(noise_chunk(rng, chunk_len), f"noise{i}"), 1, "N", i))
    return chunks
