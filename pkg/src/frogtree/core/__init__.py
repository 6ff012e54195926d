"""Tree coordinates, parameters, randomness and scheduling shared by the simulators."""
