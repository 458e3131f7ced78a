# tunetree test suite
