"""Simulator and analytic toolkit for UAV-mounted mmWave fronthaul downlinks.

Modules:
    special_math  -- Bessel I0 and Marcum Q1 primitives
    antenna       -- square-array patterns and the worst-case envelope
    geometry      -- deployments, associations, pointing angles
    channel       -- path loss, LoS probability, noise, orientation jitter
    interference  -- exact per-link interference terms and SINR
    mcsim         -- seeded Monte-Carlo outage engine
    analytic      -- closed-form worst-case outage chain and average bound
    cli           -- batch experiment front-end
"""

__version__ = "0.1.0"
