"""Numerical calculus of one-dimensional fractional Orlicz-Sobolev spaces and Hardy-inequality checkers."""
