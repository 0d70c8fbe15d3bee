# Workers package
