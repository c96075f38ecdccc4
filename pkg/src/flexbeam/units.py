"""Decibel and dBm conversions. Linear watts are used everywhere internally;
dB/dBm appear only at configuration I/O."""

import numpy as np


def db_to_linear(x_db):
    "Power ratio from dB."
    return 10.0 ** (np.asarray(x_db, dtype=float) / 10.0)


def linear_to_db(x):
    "dB from power ratio."
    return 10.0 * np.log10(np.asarray(x, dtype=float))


def dbm_to_watts(x_dbm):
    "Watts from dBm."
    return 10.0 ** ((np.asarray(x_dbm, dtype=float) - 30.0) / 10.0)


def watts_to_dbm(x_w):
    "dBm from watts."
    return 10.0 * np.log10(np.asarray(x_w, dtype=float)) + 30.0
