"""Flow classification: service chains, placement, and the forwarding table.

A service chain is an ordered list of named function instances; placement maps
each instance name to the pool server hosting it. Compiling a chain walks the
instance list and emits one fabric *hop* per maximal run of same-server
instances, so `["nat0", "fw0", "ids1"]` with nat0/fw0 on server 0 and ids1 on
server 1 becomes two hops: (server 0, 2 functions) then (server 1, 1
function). A cell tagged with that chain crosses the crossbar once per hop
plus once more to its egress TPort.

The Classifier owns the compiled table. Lookups are by chain index (the tag
carried by arriving cells); a tag with no rule falls back to the default
decision, or raises ClassificationError when no default was configured.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import ClassificationError, ConfigError
from .fabric import PortMap

ROUTE_DIRECT = -1
ROUTE_FILTERED = -2


@dataclass(frozen=True)
class ServiceChain:
    """Named ordered sequence of function-instance names."""

    name: str
    nfis: tuple

    def __post_init__(self):
        if not self.name:
            raise ConfigError("service chain needs a non-empty name")
        if len(self.nfis) == 0:
            raise ConfigError(f"service chain {self.name!r} lists no functions")


@dataclass(frozen=True)
class Hop:
    """One pool visit: the server's fabric port and the functions applied there."""

    fport: int
    nfis: tuple


@dataclass(frozen=True)
class ServicePath:
    chain: str
    hops: tuple


@dataclass(frozen=True)
class SfpTag:
    """Per-cell view of its remaining journey: pool hops plus final egress."""

    hops: tuple
    egress_tport: int


@dataclass(frozen=True)
class Forward:
    """Classification verdict: route the cell (route < 0 means plain forwarding)."""

    route: int


@dataclass(frozen=True)
class Filtered:
    """Classification verdict: discard the cell at ingress."""


class Classifier:
    """Compiled chain table for one fabric.

    `chains[k]` is addressable by tag k; `placement` maps instance name ->
    server index in [0, num_fports). Pass `default=Filtered()` to silently
    filter unknown tags instead of raising.
    """

    def __init__(
        self,
        ports: PortMap,
        chains: Sequence[ServiceChain] = (),
        placement: Mapping[str, int] | None = None,
        default=None,
    ):
        placement = dict(placement or {})
        for name, server in placement.items():
            if not 0 <= server < ports.num_fports:
                raise ConfigError(
                    f"instance {name!r} placed on server {server}, but the pool "
                    f"has {ports.num_fports} servers"
                )
        self.ports = ports
        self.chains = tuple(chains)
        self.placement = placement
        self.default = default
        self.paths = tuple(self._compile(c) for c in self.chains)

    def _compile(self, chain: ServiceChain) -> ServicePath:
        hops = []
        cur_server = -1
        cur_nfis: list[str] = []
        for nfi in chain.nfis:
            if nfi not in self.placement:
                raise ConfigError(
                    f"chain {chain.name!r} references unplaced instance {nfi!r}"
                )
            server = self.placement[nfi]
            if server == cur_server:
                cur_nfis.append(nfi)
            else:
                if cur_nfis:
                    hops.append(
                        Hop(fport=self.ports.num_tports + cur_server, nfis=tuple(cur_nfis))
                    )
                cur_server = server
                cur_nfis = [nfi]
        hops.append(Hop(fport=self.ports.num_tports + cur_server, nfis=tuple(cur_nfis)))
        return ServicePath(chain=chain.name, hops=tuple(hops))

    @property
    def num_routes(self) -> int:
        return len(self.paths)

    def classify(self, chain_index: int | None):
        """Forwarding decision for one tag. None tags forward directly."""
        if chain_index is None:
            return Forward(route=ROUTE_DIRECT)
        if 0 <= chain_index < len(self.paths):
            return Forward(route=chain_index)
        if self.default is not None:
            return self.default
        raise ClassificationError(
            f"no rule for chain tag {chain_index} and no default configured"
        )

    def service_path(self, route: int) -> ServicePath:
        return self.paths[route]

    def route_table(self, num_tags: int) -> np.ndarray:
        """Tag -> route lookup for the engine: entry t is the compiled route for
        tag t, ROUTE_FILTERED where classification filters the tag."""
        table = np.empty(num_tags, dtype=np.int32)
        for t in range(num_tags):
            decision = self.classify(t)
            table[t] = decision.route if isinstance(decision, Forward) else ROUTE_FILTERED
        return table

    def compiled_arrays(self):
        """(route_fports, route_nfis, route_lens) padded to the longest path,
        in the layout the fabric state and engine kernel consume."""
        n_routes = len(self.paths)
        max_hops = max((len(p.hops) for p in self.paths), default=1)
        route_fports = np.zeros((n_routes, max_hops), dtype=np.int16)
        route_nfis = np.zeros((n_routes, max_hops), dtype=np.int16)
        route_lens = np.zeros(n_routes, dtype=np.int16)
        for r, path in enumerate(self.paths):
            route_lens[r] = len(path.hops)
            for h, hop in enumerate(path.hops):
                route_fports[r, h] = hop.fport
                route_nfis[r, h] = len(hop.nfis)
        return route_fports, route_nfis, route_lens


# strides between a chain's two servers; several distinct offsets so the
# pool-to-pool traffic is spread over many VOQs but still has visible
# per-VOQ concentration (perfectly spread transitions would make the pool
# traffic indistinguishable from uniform)
DEFAULT_CHAIN_STRIDES = (1, 3, 5, 8, 11, 13)


def default_pool_layout(num_servers: int, functions=("nat", "fw", "ids", "vpn")):
    """Stock chain set and placement for a pool of `num_servers` servers.

    Server k hosts one instance of each function (`nat{k}`, `fw{k}`, ...).
    Every chain is split across two servers: the first half of the function
    list runs on server a, the second half on server (a + stride) % n, giving
    each chain two pool hops. One chain exists per (server, stride) pair, so
    every server originates and terminates the same number of chains and the
    pool load stays balanced. A single-server pool degenerates to one local
    one-hop chain hosting the whole function list.
    """
    if num_servers < 1:
        raise ConfigError(f"pool layout needs >= 1 server, got {num_servers}")
    placement = {}
    for k in range(num_servers):
        for f in functions:
            placement[f"{f}{k}"] = k
    half = max(len(functions) // 2, 1)
    chains = []
    if num_servers == 1:
        chains.append(
            ServiceChain(name="sfc_0_0", nfis=tuple(f"{f}0" for f in functions))
        )
        return chains, placement
    seen = set()
    for a in range(num_servers):
        for stride in DEFAULT_CHAIN_STRIDES:
            b = (a + stride) % num_servers
            if b == a or (a, b) in seen:
                continue
            seen.add((a, b))
            first = tuple(f"{f}{a}" for f in functions[:half])
            second = tuple(f"{f}{b}" for f in functions[half:])
            chains.append(ServiceChain(name=f"sfc_{a}_{b}", nfis=first + second))
    return chains, placement
