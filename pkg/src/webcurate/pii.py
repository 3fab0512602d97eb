"""Replace email addresses and public IPv4 addresses with fixed stand-ins."""

from __future__ import annotations

import ipaddress
import re
from dataclasses import dataclass

EMAIL_SUBSTITUTE = "email@example.com"
# documentation ranges (RFC 5737); never treated as public addresses
IP_SUBSTITUTES = ("192.0.2.1", "198.51.100.1", "203.0.113.1")

# local@domain.tld: dotted atoms of [A-Za-z0-9!#$%&'*+/=?^_`{|}~-], a
# domain of hyphenated labels and an alphabetic TLD of 2+ letters
EMAIL_RE = re.compile(
    r"(?<![\w.+-])[A-Za-z0-9!#$%&'*+/=?^_`{|}~-]+(?:\.[A-Za-z0-9!#$%&'*+/=?^_`{|}~-]+)*"
    r"@(?:[A-Za-z0-9](?:[A-Za-z0-9-]*[A-Za-z0-9])?\.)+[A-Za-z]{2,}(?![\w-])"
)
# dotted quads not glued to other digits or dots (so "1.2.3.4.5" is skipped)
IPV4_RE = re.compile(r"(?<![\d.])(?:\d{1,3}\.){3}\d{1,3}(?![\d]|\.\d)")

PRIVATE_NETWORKS = tuple(
    ipaddress.ip_network(n)
    for n in (
        "10.0.0.0/8",
        "172.16.0.0/12",
        "192.168.0.0/16",
        "127.0.0.0/8",
        "169.254.0.0/16",
        "0.0.0.0/8",
        "224.0.0.0/4",
        "240.0.0.0/4",
    )
)
_SUBSTITUTE_IPS = frozenset(IP_SUBSTITUTES)


@dataclass
class ScrubReport:
    emails_replaced: int = 0
    ips_replaced: int = 0
    ips_skipped_private: int = 0

    def __add__(self, other: "ScrubReport") -> "ScrubReport":
        return ScrubReport(
            self.emails_replaced + other.emails_replaced,
            self.ips_replaced + other.ips_replaced,
            self.ips_skipped_private + other.ips_skipped_private,
        )


def is_private(addr: ipaddress.IPv4Address) -> bool:
    return any(addr in net for net in PRIVATE_NETWORKS)


def anonymize(text: str) -> tuple[str, ScrubReport]:
    """Scrub ``text``. Substitutes are never replaced again, so the result is
    a fixed point: ``anonymize(anonymize(t)[0])[0] == anonymize(t)[0]``."""
    report = ScrubReport()

    def email(m: re.Match) -> str:
        if m.group(0) == EMAIL_SUBSTITUTE:
            return m.group(0)
        report.emails_replaced += 1
        return EMAIL_SUBSTITUTE

    text = EMAIL_RE.sub(email, text)

    def ip(m: re.Match) -> str:
        raw = m.group(0)
        try:
            addr = ipaddress.IPv4Address(raw)
        except ValueError:  # an octet above 255, or a leading zero
            return raw
        if raw in _SUBSTITUTE_IPS:
            return raw
        if is_private(addr):
            report.ips_skipped_private += 1
            return raw
        sub = IP_SUBSTITUTES[report.ips_replaced % len(IP_SUBSTITUTES)]
        report.ips_replaced += 1
        return sub

    return IPV4_RE.sub(ip, text), report
