from hypothesis import given, settings
from hypothesis import strategies as st

from webcurate.pii import EMAIL_SUBSTITUTE, IP_SUBSTITUTES, ScrubReport, anonymize


def test_email_replaced():
    out, rep = anonymize("Mail jo.smith+tag@news-site.co.uk or a@b.io today.")
    assert out == f"Mail {EMAIL_SUBSTITUTE} or {EMAIL_SUBSTITUTE} today."
    assert rep.emails_replaced == 2


def test_not_emails():
    for text in ("user@localhost", "@handle", "a@b.c", "x@-bad.com"):
        assert anonymize(text)[0] == text


def test_public_ips_rotate_substitutes():
    out, rep = anonymize("8.8.8.8 1.1.1.1 9.9.9.9 4.4.4.4")
    assert out.split() == [*IP_SUBSTITUTES, IP_SUBSTITUTES[0]]
    assert rep.ips_replaced == 4


def test_private_and_invalid_ips_kept():
    text = "10.1.2.3 192.168.0.1 127.0.0.1 172.20.0.5 256.1.1.1 01.2.3.4 1.2.3.4.5 v1.2.3.4"
    out, rep = anonymize(text)
    assert out.split()[:7] == text.split()[:7]
    assert rep.ips_skipped_private == 4


def test_substitutes_are_fixed_points():
    text = f"{EMAIL_SUBSTITUTE} {' '.join(IP_SUBSTITUTES)}"
    assert anonymize(text) == (text, ScrubReport())


def test_report_adds():
    assert ScrubReport(1, 2, 3) + ScrubReport(1, 1, 1) == ScrubReport(2, 3, 4)


pieces = st.sampled_from(["a@b.com", "x.y@mail.example.org", "8.8.8.8", "10.0.0.1", "300.1.1.1", "word", " ",
                          "\n", ".", "@", "1.2.3", "192.0.2.1", EMAIL_SUBSTITUTE, "-", "9"])


@settings(max_examples=300, deadline=None)
@given(st.lists(st.one_of(pieces, st.text(max_size=5)), max_size=20).map("".join))
def test_idempotent(text):
    once, _ = anonymize(text)
    twice, rep = anonymize(once)
    assert twice == once
    assert rep.emails_replaced == 0 and rep.ips_replaced == 0


@settings(max_examples=200, deadline=None)
@given(st.lists(pieces, max_size=20).map(" ".join))
def test_counts_match_substitutions(text):
    out, rep = anonymize(text)
    assert out.count(EMAIL_SUBSTITUTE) >= rep.emails_replaced
    assert len(out.split()) == len(text.split())
