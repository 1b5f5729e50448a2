"""Dense-reader RFID network simulator: IE-RAP and baseline anti-collision protocols."""

__version__ = "0.1.0"
