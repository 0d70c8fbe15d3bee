# Dashboard package