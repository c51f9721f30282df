"""Team network layout: which address prefix belongs to which team, and
which destination port carries which service.

Config file format, one entry per line (``#`` starts a comment)::

    10.1.0.0/16 men in black hats
    10.2.0.0/16 Robot Mafia
    port 2345 02345
"""

from __future__ import annotations

import ipaddress
from dataclasses import dataclass, field

from .exceptions import TeamMapError, UnmappedAddressError


@dataclass
class TeamMap:
    networks: list[tuple[ipaddress.IPv4Network, str]] = field(default_factory=list)
    services: dict[int, str] = field(default_factory=dict)

    def __post_init__(self):
        names = [name for _, name in self.networks]
        if len(set(names)) != len(names):
            raise TeamMapError("team names must be unique")
        nets = sorted(net for net, _ in self.networks)
        for a, b in zip(nets, nets[1:]):
            if a.overlaps(b):
                raise TeamMapError(f"prefixes {a} and {b} overlap")
        for port in self.services:
            if not 0 <= port <= 65535:
                raise TeamMapError(f"port {port} out of range")
        self._cache: dict[str, str | None] = {}

    @classmethod
    def from_entries(cls, networks, services=None) -> "TeamMap":
        nets = [(ipaddress.IPv4Network(cidr, strict=False), name) for cidr, name in networks]
        return cls(nets, dict(services or {}))

    @classmethod
    def parse(cls, text: str) -> "TeamMap":
        networks = []
        services = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split(None, 1)
            if len(parts) < 2:
                raise TeamMapError(f"line {lineno}: expected '<cidr> <team>' or 'port <n> <svc>'")
            if parts[0] == "port":
                fields = parts[1].split()
                if len(fields) != 2 or not fields[0].isdigit():
                    raise TeamMapError(f"line {lineno}: expected 'port <number> <svc id>'")
                services[int(fields[0])] = fields[1]
                continue
            try:
                net = ipaddress.IPv4Network(parts[0], strict=False)
            except ValueError as exc:
                raise TeamMapError(f"line {lineno}: {exc}") from exc
            networks.append((net, parts[1].strip()))
        return cls(networks, services)

    @classmethod
    def load(cls, path) -> "TeamMap":
        with open(path, encoding="utf-8") as f:
            return cls.parse(f.read())

    @property
    def teams(self) -> list[str]:
        return [name for _, name in self.networks]

    def team_of(self, addr: str) -> str:
        try:
            team = self._cache[addr]
        except KeyError:
            ip = ipaddress.IPv4Address(addr)
            team = next((name for net, name in self.networks if ip in net), None)
            self._cache[addr] = team
        if team is None:
            raise UnmappedAddressError(addr)
        return team

    def service_of(self, port: int) -> str:
        return self.services.get(port, str(port))
