# Coded caching schemes
