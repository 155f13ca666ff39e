"""
Route modules for nrdual.

The JSON API blueprint lives in ``api.py``.
"""
