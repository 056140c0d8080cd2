"""Uniform-random legal policy; the smallest useful BaseAgent."""

import random

from arena_sdk import BaseAgent


class RandomAgent(BaseAgent):
    def __init__(self, name: str):
        super().__init__(name)
        self.rng = random.Random(0)

    def on_hello(self, game, seat, config):
        self.rng = random.Random(f"{self.name}:{game}:{seat}")

    def select_action(self, observation, action_mask):
        legal = [i for i, bit in enumerate(action_mask) if bit]
        if not legal:
            return None
        return self.rng.choice(legal)
