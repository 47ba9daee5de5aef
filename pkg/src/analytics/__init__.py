"""Analytics module - energy landscape, exact spectrum, mean-field and entanglement computations."""
