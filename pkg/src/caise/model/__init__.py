"""Command predictor: encoders, copy-augmented decoder, training loop."""
