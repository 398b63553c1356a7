"""Test suite for SHPI."""