"""Test suite for the RF magnetometer simulator."""
