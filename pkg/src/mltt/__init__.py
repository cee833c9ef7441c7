"""Intensional Martin-Löf type theory with configurable Pi-type rule sets."""
