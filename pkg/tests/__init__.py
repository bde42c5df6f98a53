# veilcache test suite
