"""Hybrid community microgrid dispatch lab"""
