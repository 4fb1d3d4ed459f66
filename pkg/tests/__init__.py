"""Test package for dimspec."""
