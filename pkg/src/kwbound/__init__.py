"""Formula-size lower bounds from the rectangle-cover LP with clique and rank constraints."""
