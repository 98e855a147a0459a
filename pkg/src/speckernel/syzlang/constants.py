"""Constant resolution against the indexed macro table.

Supports object-like macro chains, integer/char literals, the operators
+ - << >> | with parentheses, sizeof over a lexical C type model, and the
_IO/_IOR/_IOW/_IOWR/_IOC command encodings. Function-like user macros are
out of scope and surface as unresolved.

The sizeof model assumes LP64: 8-byte pointers and longs, natural
alignment, structs padded to member alignment, unions sized by their
widest member. Bitfields are sized as their base type.
"""

from __future__ import annotations

from dataclasses import replace

from speckernel.indexer import _lexer
from speckernel.indexer.database import DefinitionDatabase

from .ast import (
    ArrayType,
    ConstType,
    ErrorCode,
    FlagsType,
    IntType,
    SpecFile,
    ValidationError,
    walk_type,
)
from .printer import render_spec_with_map

# command encoding bit layout: 2 direction, 14 size, 8 type, 8 number
_IOC_NRSHIFT = 0
_IOC_TYPESHIFT = 8
_IOC_SIZESHIFT = 16
_IOC_DIRSHIFT = 30

_IOC_NONE = 0
_IOC_WRITE = 1
_IOC_READ = 2

_IOC_FAMILY = {
    "_IO": _IOC_NONE,
    "_IOW": _IOC_WRITE,
    "_IOR": _IOC_READ,
    "_IOWR": _IOC_READ | _IOC_WRITE,
}

# fallbacks for names every kernel tree defines but small fixtures may not
DEFAULT_BUILTIN_CONSTANTS = {
    "AT_FDCWD": -100,
    "O_RDWR": 2,
    "O_NONBLOCK": 0x800,
}

_POINTER_SIZE = 8

_PRIMITIVE_SIZES = {
    "char": 1, "bool": 1, "u8": 1, "s8": 1, "__u8": 1, "__s8": 1,
    "uint8_t": 1, "int8_t": 1,
    "short": 2, "u16": 2, "s16": 2, "__u16": 2, "__s16": 2,
    "__le16": 2, "__be16": 2, "uint16_t": 2, "int16_t": 2,
    "int": 4, "unsigned": 4, "u32": 4, "s32": 4, "__u32": 4, "__s32": 4,
    "__le32": 4, "__be32": 4, "uint32_t": 4, "int32_t": 4, "uint": 4,
    "long": 8, "u64": 8, "s64": 8, "__u64": 8, "__s64": 8,
    "__le64": 8, "__be64": 8, "uint64_t": 8, "int64_t": 8,
    "size_t": 8, "ssize_t": 8, "uintptr_t": 8, "intptr_t": 8, "ulong": 8,
}

_TYPE_QUALIFIERS = {"const", "volatile", "signed", "__user", "__iomem", "struct", "union", "enum"}

_CHAR_ESCAPES = {"n": 10, "t": 9, "r": 13, "0": 0, "\\": 92, "'": 39, '"': 34, "a": 7, "b": 8, "f": 12, "v": 11}


class UnresolvedConstant(Exception):
    def __init__(self, name: str, detail: str = ""):
        self.name = name
        super().__init__(detail or f"cannot resolve constant {name!r}")


def ioc_encode(direction: int, type_: int, nr: int, size: int) -> int:
    return (
        (direction << _IOC_DIRSHIFT)
        | (size << _IOC_SIZESHIFT)
        | ((type_ & 0xFF) << _IOC_TYPESHIFT)
        | ((nr & 0xFF) << _IOC_NRSHIFT)
    )


class _Cursor:
    def __init__(self, toks):
        self.toks = toks
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def next(self):
        t = self.peek()
        if t is not None:
            self.i += 1
        return t

    def accept(self, kind, value=None):
        t = self.peek()
        if t is None or t[0] != kind:
            return None
        if value is not None and t[1] != value:
            return None
        self.i += 1
        return t

    def expect_punct(self, value):
        if self.accept(_lexer.PUNCT, value) is None:
            got = self.peek()
            raise UnresolvedConstant(
                "<expr>", f"expected {value!r}, got {got[1] if got else 'end of expression'}"
            )


def _int_literal(text: str) -> int:
    s = text.rstrip("uUlL")
    if not s:
        raise ValueError(text)
    # C octal: a leading zero with more digits after it (0777, 00000002)
    if len(s) > 1 and s[0] == "0" and s[1] not in "xXbB":
        return int(s, 8)
    return int(s, 0)


def _char_literal(text: str) -> int:
    inner = text[1:-1]
    if inner.startswith("\\"):
        esc = inner[1:]
        if esc and esc[0] in ("x", "X"):
            return int(esc[1:], 16)
        if esc in _CHAR_ESCAPES:
            return _CHAR_ESCAPES[esc]
        if esc.isdigit():
            return int(esc, 8)
        raise ValueError(text)
    if len(inner) != 1:
        raise ValueError(text)
    return ord(inner)


def evaluate_expr(text: str, db: DefinitionDatabase, env: dict | None = None,
                  _active: frozenset = frozenset()) -> int:
    """Evaluate a C constant expression over the db macro table."""
    toks = _lexer.tokenize(text.replace("\\\n", " "))
    cur = _Cursor(toks)
    value = _parse_bitor(cur, db, env or {}, _active)
    if cur.peek() is not None:
        raise UnresolvedConstant("<expr>", f"trailing tokens in expression {text!r}")
    return value


def _parse_bitor(cur, db, env, active) -> int:
    v = _parse_shift(cur, db, env, active)
    while cur.accept(_lexer.PUNCT, "|"):
        v |= _parse_shift(cur, db, env, active)
    return v


def _parse_shift(cur, db, env, active) -> int:
    v = _parse_additive(cur, db, env, active)
    while True:
        if cur.accept(_lexer.PUNCT, "<<"):
            v <<= _parse_additive(cur, db, env, active)
        elif cur.accept(_lexer.PUNCT, ">>"):
            v >>= _parse_additive(cur, db, env, active)
        else:
            return v


def _parse_additive(cur, db, env, active) -> int:
    v = _parse_unary(cur, db, env, active)
    while True:
        if cur.accept(_lexer.PUNCT, "+"):
            v += _parse_unary(cur, db, env, active)
        elif cur.accept(_lexer.PUNCT, "-"):
            v -= _parse_unary(cur, db, env, active)
        else:
            return v


def _parse_unary(cur, db, env, active) -> int:
    if cur.accept(_lexer.PUNCT, "-"):
        return -_parse_unary(cur, db, env, active)
    if cur.accept(_lexer.PUNCT, "+"):
        return _parse_unary(cur, db, env, active)
    return _parse_atom(cur, db, env, active)


def _parse_atom(cur, db, env, active) -> int:
    t = cur.peek()
    if t is None:
        raise UnresolvedConstant("<expr>", "unexpected end of expression")
    kind, value = t[0], t[1]

    if kind == _lexer.PUNCT and value == "(":
        cur.next()
        v = _parse_bitor(cur, db, env, active)
        cur.expect_punct(")")
        return v
    if kind == _lexer.NUMBER:
        cur.next()
        try:
            return _int_literal(value)
        except ValueError:
            raise UnresolvedConstant("<expr>", f"non-integer literal {value!r}") from None
    if kind == _lexer.CHARLIT:
        cur.next()
        try:
            return _char_literal(value)
        except ValueError:
            raise UnresolvedConstant("<expr>", f"bad char literal {value!r}") from None
    if kind != _lexer.IDENT:
        raise UnresolvedConstant("<expr>", f"unexpected token {value!r}")

    cur.next()
    if value in _IOC_FAMILY:
        return _parse_ioc_call(cur, value, db, env, active)
    if value == "_IOC":
        cur.expect_punct("(")
        args = [_parse_bitor(cur, db, env, active)]
        for _ in range(3):
            cur.expect_punct(",")
            args.append(_parse_bitor(cur, db, env, active))
        cur.expect_punct(")")
        return ioc_encode(args[0], args[1], args[2], args[3])
    if value == "sizeof":
        cur.expect_punct("(")
        type_toks = []
        depth = 1
        while True:
            nt = cur.next()
            if nt is None:
                raise UnresolvedConstant("<expr>", "unterminated sizeof")
            if nt[0] == _lexer.PUNCT and nt[1] == "(":
                depth += 1
            elif nt[0] == _lexer.PUNCT and nt[1] == ")":
                depth -= 1
                if depth == 0:
                    break
            type_toks.append(nt)
        size, _align = _sizeof_tokens(type_toks, db, active)
        return size
    return resolve_name(value, db, env=env, _active=active)


def _parse_ioc_call(cur, name, db, env, active) -> int:
    direction = _IOC_FAMILY[name]
    cur.expect_punct("(")
    type_v = _parse_bitor(cur, db, env, active)
    cur.expect_punct(",")
    nr_v = _parse_bitor(cur, db, env, active)
    size = 0
    if name != "_IO":
        cur.expect_punct(",")
        type_toks = []
        depth = 0
        while True:
            t = cur.peek()
            if t is None:
                raise UnresolvedConstant("<expr>", f"unterminated {name} call")
            if t[0] == _lexer.PUNCT and t[1] == "(":
                depth += 1
            elif t[0] == _lexer.PUNCT and t[1] == ")":
                if depth == 0:
                    break
                depth -= 1
            type_toks.append(cur.next())
        size, _align = _sizeof_tokens(type_toks, db, active)
    cur.expect_punct(")")
    return ioc_encode(direction, type_v, nr_v, size)


def resolve_name(name: str, db: DefinitionDatabase, *, env: dict | None = None,
                 _active: frozenset = frozenset()) -> int:
    """Resolve a macro or builtin constant name to an integer."""
    env = env or {}
    if name in _active:
        raise UnresolvedConstant(name, f"cyclic macro expansion through {name!r}")
    body = db.macros.get(name)
    if body is not None:
        if body.startswith("("):
            # no space before "(": function-like macro, not expandable here
            raise UnresolvedConstant(name, f"{name!r} is a function-like macro")
        body = body.strip()
        if not body:
            raise UnresolvedConstant(name, f"{name!r} has an empty body")
        return evaluate_expr(body, db, env, _active | {name})
    if name in env:
        return env[name]
    raise UnresolvedConstant(name)


# --- sizeof ----------------------------------------------------------------

def _sizeof_tokens(toks, db, active) -> tuple[int, int]:
    """(size, alignment) of the C type named by the token list."""
    idents = [t[1] for t in toks if t[0] == _lexer.IDENT]
    if any(t[0] == _lexer.PUNCT and t[1] == "*" for t in toks):
        return _POINTER_SIZE, _POINTER_SIZE

    words = [w for w in idents if w not in ("const", "volatile", "__user", "__iomem")]
    if not words:
        raise UnresolvedConstant("<sizeof>", "empty type in sizeof")

    if words[0] in ("struct", "union"):
        if len(words) < 2:
            raise UnresolvedConstant("<sizeof>", f"anonymous {words[0]} in sizeof")
        return _sizeof_named(words[1], db, active)
    if words[0] == "enum":
        return 4, 4

    if words.count("long") == 2:
        return 8, 8
    simple = [w for w in words if w not in ("unsigned", "signed")]
    if not simple:
        return 4, 4  # bare unsigned/signed
    if len(simple) == 2 and simple == ["long", "int"]:
        return 8, 8
    if len(simple) == 2 and simple == ["short", "int"]:
        return 2, 2
    head = simple[0]
    if head in _PRIMITIVE_SIZES:
        n = _PRIMITIVE_SIZES[head]
        return n, n
    return _sizeof_named(head, db, active)


def _sizeof_named(name: str, db: DefinitionDatabase, active) -> tuple[int, int]:
    if name in active:
        raise UnresolvedConstant(name, f"cyclic layout through {name!r}")
    for d in db.definitions.get(name, ()):
        if d.kind in ("struct", "union"):
            return _sizeof_body(d.text, db, active | {name})
    raise UnresolvedConstant(name, f"no struct/union definition for {name!r}")


def _sizeof_body(def_text: str, db: DefinitionDatabase, active) -> tuple[int, int]:
    toks = _lexer.tokenize(def_text)
    is_union = False
    for t in toks:
        if t[0] == _lexer.IDENT and t[1] in ("struct", "union"):
            is_union = t[1] == "union"
            break
    open_i = next(
        (i for i, t in enumerate(toks) if t[0] == _lexer.PUNCT and t[1] == "{"), None
    )
    if open_i is None:
        raise UnresolvedConstant("<sizeof>", "definition without a body")
    depth = 0
    close_i = None
    for i in range(open_i, len(toks)):
        if toks[i][0] == _lexer.PUNCT:
            if toks[i][1] == "{":
                depth += 1
            elif toks[i][1] == "}":
                depth -= 1
                if depth == 0:
                    close_i = i
                    break
    if close_i is None:
        raise UnresolvedConstant("<sizeof>", "unbalanced braces in definition")
    return _layout_members(toks[open_i + 1 : close_i], db, active, is_union)


def _layout_members(toks, db, active, is_union: bool) -> tuple[int, int]:
    offset = 0
    max_size = 0
    max_align = 1
    for member in _split_members(toks):
        m_size, m_align = _member_size(member, db, active)
        if m_size == 0:
            continue
        max_align = max(max_align, m_align)
        if is_union:
            max_size = max(max_size, m_size)
        else:
            offset = _align_up(offset, m_align)
            offset += m_size
    if is_union:
        size = _align_up(max_size, max_align)
    else:
        size = _align_up(offset, max_align)
    return size, max_align


def _align_up(n: int, align: int) -> int:
    return (n + align - 1) // align * align


def _split_members(toks):
    members = []
    depth = 0
    start = 0
    for i, t in enumerate(toks):
        if t[0] != _lexer.PUNCT:
            continue
        if t[1] in "{([":
            depth += 1
        elif t[1] in "})]":
            depth -= 1
        elif t[1] == ";" and depth == 0:
            if i > start:
                members.append(toks[start:i])
            start = i + 1
    if start < len(toks):
        members.append(toks[start:])
    return [m for m in members if m]


def _member_size(member, db, active) -> tuple[int, int]:
    # inline anonymous (or named-inline) struct/union member
    if (
        member
        and member[0][0] == _lexer.IDENT
        and member[0][1] in ("struct", "union")
        and any(t[0] == _lexer.PUNCT and t[1] == "{" for t in member)
    ):
        text = " ".join(t[1] for t in member)
        size, align = _sizeof_body(text, db, active)
        count = _array_count(member, db)
        return size * count, align

    # strip bitfield width; the base type still occupies its slot here
    for i, t in enumerate(member):
        if t[0] == _lexer.PUNCT and t[1] == ":":
            member = member[:i]
            break

    count = _array_count(member, db)
    bracket = next(
        (i for i, t in enumerate(member) if t[0] == _lexer.PUNCT and t[1] == "["), None
    )
    decl = member[:bracket] if bracket is not None else member
    if not decl:
        raise UnresolvedConstant("<sizeof>", "empty member declaration")
    # last identifier is the member name; the rest names the type
    name_i = None
    for i in range(len(decl) - 1, -1, -1):
        if decl[i][0] == _lexer.IDENT:
            name_i = i
            break
    if name_i is None or name_i == 0:
        raise UnresolvedConstant("<sizeof>", "member without a type")
    size, align = _sizeof_tokens(decl[:name_i], db, active)
    return size * count, align


def _array_count(member, db) -> int:
    count = 1
    brace_depth = 0
    i = 0
    while i < len(member):
        if member[i][0] == _lexer.PUNCT and member[i][1] == "{":
            brace_depth += 1
        elif member[i][0] == _lexer.PUNCT and member[i][1] == "}":
            brace_depth -= 1
        elif member[i][0] == _lexer.PUNCT and member[i][1] == "[" and brace_depth == 0:
            j = i + 1
            inner = []
            depth = 1
            while j < len(member) and depth:
                if member[j][0] == _lexer.PUNCT and member[j][1] == "[":
                    depth += 1
                elif member[j][0] == _lexer.PUNCT and member[j][1] == "]":
                    depth -= 1
                    if depth == 0:
                        break
                inner.append(member[j])
                j += 1
            if not inner:
                return 0  # flexible array member occupies no space
            expr = " ".join(t[1] for t in inner)
            count *= evaluate_expr(expr, db)
            i = j
        i += 1
    return count


# --- spec-level resolution -------------------------------------------------

def is_int_literal(s: str) -> bool:
    try:
        int(s, 0)
        return True
    except ValueError:
        return False


def collect_constant_names(spec: SpecFile) -> list[tuple[str, str]]:
    """(constant name, owning declaration) pairs, in declaration order."""
    pairs: list[tuple[str, str]] = []
    seen = set()

    def add(name: str, target: str):
        if not is_int_literal(name) and (name, target) not in seen:
            seen.add((name, target))
            pairs.append((name, target))

    def from_type(t, target):
        for node in walk_type(t):
            if isinstance(node, ConstType):
                add(node.value, target)
            elif isinstance(node, ArrayType) and node.length is not None:
                add(node.length, target)
            elif isinstance(node, (IntType, FlagsType)):
                pass

    for fs in spec.flag_sets:
        for v in fs.values:
            add(v, fs.name)
    for t in spec.types:
        for f in t.fields:
            from_type(f.type, t.name)
    for sc in spec.syscalls:
        for _n, pt in sc.params:
            from_type(pt, sc.full_name)
    return pairs


def resolve_constants(
    spec: SpecFile,
    db: DefinitionDatabase,
    builtin_constants: dict | None = None,
) -> tuple[SpecFile, list[ValidationError]]:
    """Fill spec.constants; unresolvable names become UnknownConstant errors."""
    env = dict(DEFAULT_BUILTIN_CONSTANTS if builtin_constants is None else builtin_constants)
    _, spans = render_spec_with_map(spec)
    line_of = {(s.kind, s.name): s.start_line for s in spans}
    constants = dict(spec.constants)
    errors: list[ValidationError] = []
    for name, target in collect_constant_names(spec):
        if name in constants:
            continue
        try:
            constants[name] = resolve_name(name, db, env=env)
        except UnresolvedConstant as e:
            line = 0
            for kind in ("syscall", "type", "flags"):
                if (kind, target) in line_of:
                    line = line_of[(kind, target)]
                    break
            errors.append(
                ValidationError(
                    code=ErrorCode.UNKNOWN_CONSTANT,
                    message=str(e),
                    target=target,
                    location=("", line),
                )
            )
    return replace(spec, constants=constants), errors


def can_resolve(name: str, db: DefinitionDatabase, builtin_constants: dict | None = None) -> bool:
    env = DEFAULT_BUILTIN_CONSTANTS if builtin_constants is None else builtin_constants
    try:
        resolve_name(name, db, env=dict(env))
        return True
    except UnresolvedConstant:
        return False
