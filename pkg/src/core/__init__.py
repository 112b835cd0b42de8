"""
Core numerics and error types for zzbound
"""
