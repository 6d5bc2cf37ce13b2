# Peeling Percolation
