from .base import Agent, Observation, RandomAgent
