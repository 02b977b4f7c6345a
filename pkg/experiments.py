#!/usr/bin/env python3
"""
AESA-Net Embedding Experiments
Measure how the triplet term and buffer settings shape the shared embedding
"""

import json
from datetime import datetime
from pathlib import Path
from typing import Any

import matplotlib.pyplot as plt
import numpy as np
from loguru import logger

from aesanet import AXES, ModelConfig, TrainConfig, fit, init_params
from aesanet.data.manifest import TrainingSample
from aesanet.evaluation.embedding import collect_embeddings, embedding_gap
from aesanet.features.audio import AudioClip
from aesanet.features.frontend import synthetic_frontend


class EmbeddingExperiments:
    """Train on a planted-factor corpus and compare embedding structure"""

    def __init__(self, num_clips: int = 200, seed: int = 0):
        self.seed = seed
        self.results_dir = Path("experiment_results")
        self.results_dir.mkdir(exist_ok=True)
        self.config = ModelConfig(input_dim=16, num_layers=3, adapter_dim=16, lstm_hidden=8,
                                  shared_dim=16, attention_heads=2)
        self.samples = self.planted_corpus(num_clips)

    def planted_corpus(self, num_clips: int) -> list[TrainingSample]:
        """Clips whose pitch and ratings both follow one latent factor"""
        rng = np.random.default_rng(self.seed)
        t = np.arange(3200) / 16000
        samples = []
        for index, latent in enumerate(rng.uniform(size=num_clips)):
            audio = 0.4 * np.sin(2 * np.pi * (150 + 1800 * latent) * t) + 0.02 * rng.normal(size=t.size)
            clip = AudioClip(samples=np.clip(audio, -1, 1), sample_rate=16000, clip_id=f"p{index:03d}")
            stack = synthetic_frontend(clip, seed=self.seed, num_layers=self.config.num_layers,
                                       dim=self.config.input_dim)
            targets = np.clip(0.1 + 0.8 * latent + rng.normal(scale=0.02, size=len(AXES)), 0, 1)
            samples.append(TrainingSample(clip_id=clip.clip_id, stack=stack, targets=targets))
        return samples

    def run(self, **train_overrides) -> dict[str, Any]:
        """Fit once and report validation MSE plus per-axis near/far embedding distances"""
        split = int(len(self.samples) * 0.9)
        settings = {"learning_rate": 1e-3, "max_epochs": 10, "patience": 3, "seed": self.seed, **train_overrides}
        result = fit(self.samples[:split], self.samples[split:], TrainConfig(**settings),
                     init_params(self.config, self.seed))

        embeddings, targets = collect_embeddings(result.model, self.samples)
        epsilon = settings.get("epsilon", 0.1)
        gaps = {}
        for index, axis in enumerate(AXES):
            gap = embedding_gap(embeddings, targets[:, index], epsilon)
            gaps[axis] = {"near": gap.near_mean, "far": gap.far_mean, "gap": gap.gap}
        return {"settings": settings, "best_epoch": result.best_epoch,
                "best_val_mse": result.best_val_mse, "gaps": gaps}

    def measure_alpha_sweep(self, alphas: list[float]) -> list[dict[str, Any]]:
        results = []
        for alpha in alphas:
            print(f"Training with alpha={alpha}...")
            outcome = self.run(alpha=alpha)
            mean_gap = float(np.mean([g["gap"] for g in outcome["gaps"].values()]))
            print(f"  val MSE {outcome['best_val_mse']:.4f}, mean near/far gap {mean_gap:.4f}")
            results.append(outcome)
        return results

    def measure_capacity_sweep(self, capacities: list[int], alpha: float = 0.2) -> list[dict[str, Any]]:
        results = []
        for capacity in capacities:
            print(f"Training with buffer capacity {capacity}...")
            results.append(self.run(alpha=alpha, buffer_capacity=capacity))
        return results

    def plot_sweep(self, results: list[dict[str, Any]], key: str, filename: str):
        """Plot mean gap and validation MSE against one swept setting"""
        values = [r["settings"][key] for r in results]
        gaps = [np.mean([g["gap"] for g in r["gaps"].values()]) for r in results]
        mses = [r["best_val_mse"] for r in results]

        fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(12, 5))
        ax1.plot(values, gaps, "o-")
        ax1.set_xlabel(key)
        ax1.set_ylabel("far - near embedding distance")
        ax1.grid(True, alpha=0.3)
        ax2.plot(values, mses, "s-", color="tab:red")
        ax2.set_xlabel(key)
        ax2.set_ylabel("validation MSE (normalized)")
        ax2.grid(True, alpha=0.3)
        plt.tight_layout()
        plt.savefig(self.results_dir / filename)
        plt.close()

    def save_results(self, experiment_name: str, results: Any):
        """Save experiment results to JSON"""
        timestamp = datetime.now().isoformat()
        filename = self.results_dir / f"{experiment_name}_{timestamp}.json"

        with open(filename, "w") as f:
            json.dump({
                "experiment": experiment_name,
                "timestamp": timestamp,
                "results": results
            }, f, indent=2, default=str)

        print(f"Results saved to {filename}")


def run_all_experiments():
    """Alpha sweep and buffer capacity sweep"""
    exp = EmbeddingExperiments()

    print("=" * 60)
    print("AESA-NET EMBEDDING EXPERIMENTS")
    print("=" * 60)

    print("\n[1/2] Alpha sweep...")
    alpha_results = exp.measure_alpha_sweep([0.0, 0.05, 0.1, 0.2, 0.5])
    exp.plot_sweep(alpha_results, "alpha", "alpha_sweep.png")
    exp.save_results("alpha_sweep", alpha_results)

    print("\n[2/2] Buffer capacity sweep...")
    capacity_results = exp.measure_capacity_sweep([16, 64, 256])
    exp.plot_sweep(capacity_results, "buffer_capacity", "capacity_sweep.png")
    exp.save_results("capacity_sweep", capacity_results)

    print("\n" + "=" * 60)
    print("EXPERIMENTS COMPLETE")
    print(f"Results saved in: {exp.results_dir}")
    print("=" * 60)


def quick_comparison():
    """MSE-only versus MSE + 0.2 * triplet on the same seed"""
    exp = EmbeddingExperiments(num_clips=100)
    results = exp.measure_alpha_sweep([0.0, 0.2])
    exp.save_results("quick_alpha_comparison", results)


if __name__ == "__main__":
    logger.disable("aesanet")

    print("AESA-Net Experiments")
    print("Q: Quick comparison (alpha 0 vs 0.2)")
    print("A: All experiments")

    choice = input("Choice: ").strip().upper()
    if choice == "Q":
        quick_comparison()
    else:
        run_all_experiments()
