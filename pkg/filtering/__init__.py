# Filtering package
