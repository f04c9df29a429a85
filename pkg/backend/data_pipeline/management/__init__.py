# Management commands package
