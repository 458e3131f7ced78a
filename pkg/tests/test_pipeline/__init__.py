# Daily pipeline tests
