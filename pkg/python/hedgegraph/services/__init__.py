"""Pipeline stages for hedgegraph"""
