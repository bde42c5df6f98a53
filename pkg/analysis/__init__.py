# Audits and rate analysis
