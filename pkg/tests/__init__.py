# posipath test suite
