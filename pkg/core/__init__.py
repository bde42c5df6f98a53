# Field arithmetic, MDS codes, system model and run plumbing
