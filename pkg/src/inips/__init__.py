"""Distributed in-network intrusion prevention toolkit.

A strong flow classifier is decomposed into weak learners placed on
simulated programmable switches; flows are classified cooperatively via an
in-band chain header and majority voting, blocked in-network, and the
placement itself is computed as a colored shortest-path problem.
"""

__version__ = "0.1.0"
