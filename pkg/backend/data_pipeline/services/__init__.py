# Services package for data pipeline
