"""mracsim: singularity-free output-feedback MRAC simulation library."""

__version__ = "0.1.0"
