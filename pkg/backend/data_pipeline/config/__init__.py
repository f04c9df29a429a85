# Configuration package for data pipeline
