# tunetree: offline kernel auto-tuning
