"""Steering-law simulation of mutual motion camouflage and topological velocity alignment."""
