"""S-expression reader/printer."""

import pytest
from hypothesis import given
from hypothesis import strategies as st

from gitvouch.sexp import Atom, SexpSyntaxError, parse_all, parse_sexp, print_sexp


class TestParse:
    def test_nested_list_with_string(self):
        assert parse_sexp('(a (b "c"))') == [Atom("a"), [Atom("b"), Atom("c", quoted=True)]]

    def test_comments_ignored(self):
        assert parse_sexp("(a ;comment\n b)") == [Atom("a"), Atom("b")]

    def test_string_escapes(self):
        assert parse_sexp(r'"a\"b\\c"') == Atom('a"b\\c', quoted=True)

    def test_quote_shorthand(self):
        assert parse_sexp("(name 'chan)") == [Atom("name"), [Atom("quote"), Atom("chan")]]

    @pytest.mark.parametrize("bad", ["(unclosed", '"unterminated', "())", ")", ""])
    def test_syntax_errors(self, bad):
        with pytest.raises(SexpSyntaxError):
            parse_sexp(bad)

    def test_error_carries_offset(self):
        with pytest.raises(SexpSyntaxError) as exc:
            parse_sexp('(a "unterminated')
        assert exc.value.offset == 3

    def test_bom_rejected(self):
        with pytest.raises(SexpSyntaxError):
            parse_sexp(b"\xef\xbb\xbf(a)")

    def test_bad_utf8_rejected(self):
        with pytest.raises(SexpSyntaxError):
            parse_sexp(b"(\xff\xfe)")

    def test_parse_all_multiple_forms(self):
        forms = parse_all("(a) (b)\n(c)")
        assert forms == [[Atom("a")], [Atom("b")], [Atom("c")]]
        assert parse_all("") == []
        assert parse_all("  ; only a comment\n") == []

    def test_trailing_closer_tolerance_is_opt_in(self):
        with pytest.raises(SexpSyntaxError):
            parse_all("(a))")
        assert parse_all("(a))", allow_trailing_closers=True) == [[Atom("a")]]


atoms = st.one_of(
    st.builds(
        Atom,
        st.text(
            alphabet=st.characters(
                whitelist_categories=("Ll", "Lu", "Nd"), whitelist_characters="-_.:"
            ),
            min_size=1,
            max_size=12,
        ),
    ),
    st.builds(Atom, st.text(max_size=20), st.just(True)),
)
sexps = st.recursive(atoms, lambda children: st.lists(children, max_size=5), max_leaves=25)


@given(sexps)
def test_print_parse_round_trip(expr):
    assert parse_sexp(print_sexp(expr)) == expr
