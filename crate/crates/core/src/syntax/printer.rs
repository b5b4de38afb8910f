//! Concrete syntax output. Every printed term parses back to the same tree:
//! expansions produced by the parser (`-`, `/`, `^`, `max`, `min`, `delay^n`,
//! plain `enc`) are recognised and folded back into their surface form.

use super::ast::{ActionSet, Quantity, Tuplix};

// Binding levels, loosest first.
const SUM: u8 = 1;
const PRODUCT: u8 = 2;
const POWER: u8 = 3;
const UNARY: u8 = 4;
const ATOM: u8 = 5;

pub fn print_quantity(q: &Quantity) -> String {
    let mut out = String::new();
    write_q(q, 0, &mut out);
    out
}

pub fn print_tuplix(t: &Tuplix) -> String {
    let mut out = String::new();
    write_t(t, false, &mut out);
    out
}

fn level(q: &Quantity) -> u8 {
    match q {
        Quantity::Add(..) if as_max(q).is_some() => ATOM,
        Quantity::Add(..) => SUM,
        Quantity::Mul(..) if as_pow(q).is_some() => POWER,
        Quantity::Mul(..) => PRODUCT,
        Quantity::Neg(..) if as_min(q).is_some() => ATOM,
        Quantity::Neg(..) => UNARY,
        _ => ATOM,
    }
}

/// Recognises `(sign(u - v) + 1)/2 * (u - v) + v`.
fn as_max(q: &Quantity) -> Option<(&Quantity, &Quantity)> {
    let Quantity::Add(lhs, v) = q else {
        return None;
    };
    let Quantity::Mul(weight, diff) = &**lhs else {
        return None;
    };
    let Quantity::Add(u, neg_v) = &**diff else {
        return None;
    };
    let Quantity::Neg(v2) = &**neg_v else {
        return None;
    };
    let Quantity::Mul(sign_plus_one, inv_two) = &**weight else {
        return None;
    };
    let Quantity::Inv(two) = &**inv_two else {
        return None;
    };
    let Quantity::Add(sign, one) = &**sign_plus_one else {
        return None;
    };
    let Quantity::Sign(diff2) = &**sign else {
        return None;
    };
    let two_ok = matches!(&**two, Quantity::Num(n) if *n == 2u32.into());
    (two_ok && **one == Quantity::One && diff2 == diff && v2 == v).then_some((&**u, &**v))
}

/// Recognises `-max(-u, -v)`.
fn as_min(q: &Quantity) -> Option<(&Quantity, &Quantity)> {
    let Quantity::Neg(inner) = q else { return None };
    let (nu, nv) = as_max(inner)?;
    match (nu, nv) {
        (Quantity::Neg(u), Quantity::Neg(v)) => Some((&**u, &**v)),
        _ => None,
    }
}

/// Recognises the left-nested product `p * p * ... * p` with at least two factors.
fn as_pow(q: &Quantity) -> Option<(&Quantity, u32)> {
    let Quantity::Mul(lhs, base) = q else {
        return None;
    };
    let mut count = 1u32;
    let mut cur: &Quantity = lhs;
    loop {
        if cur == &**base {
            return Some((base, count + 1));
        }
        match cur {
            Quantity::Mul(l, r) if r == base => {
                count += 1;
                cur = l;
            }
            _ => return None,
        }
    }
}

fn write_q(q: &Quantity, min_level: u8, out: &mut String) {
    let paren = level(q) < min_level;
    if paren {
        out.push('(');
    }
    match q {
        Quantity::Zero => out.push('0'),
        Quantity::One => out.push('1'),
        Quantity::Num(n) => out.push_str(&n.to_string()),
        Quantity::Var(v) => out.push_str(v),
        Quantity::Add(a, b) => {
            if let Some((u, v)) = as_max(q) {
                write_call("max", &[u, v], out);
            } else if let (Quantity::Neg(b), None) = (&**b, as_min(b)) {
                write_q(a, SUM, out);
                out.push_str(" - ");
                write_q(b, SUM + 1, out);
            } else {
                write_q(a, SUM, out);
                out.push_str(" + ");
                write_q(b, SUM + 1, out);
            }
        }
        Quantity::Mul(a, b) => {
            if let Some((base, n)) = as_pow(q) {
                write_q(base, POWER, out);
                out.push('^');
                out.push_str(&n.to_string());
            } else if let Quantity::Inv(b) = &**b {
                write_q(a, PRODUCT, out);
                out.push('/');
                write_q(b, PRODUCT + 1, out);
            } else {
                write_q(a, PRODUCT, out);
                out.push('*');
                write_q(b, PRODUCT + 1, out);
            }
        }
        Quantity::Neg(a) => {
            if let Some((u, v)) = as_min(q) {
                write_call("min", &[u, v], out);
            } else {
                out.push('-');
                write_q(a, UNARY, out);
            }
        }
        Quantity::Inv(a) => write_call("inv", &[a], out),
        Quantity::Sign(a) => write_call("sign", &[a], out),
        Quantity::ICap(rate, body) => {
            out.push_str("icap@");
            write_qatom(rate, out);
            out.push('(');
            write_t(body, false, out);
            out.push(')');
        }
    }
    if paren {
        out.push(')');
    }
}

fn write_call(name: &str, args: &[&Quantity], out: &mut String) {
    out.push_str(name);
    out.push('(');
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write_q(a, 0, out);
    }
    out.push(')');
}

fn write_qatom(q: &Quantity, out: &mut String) {
    match q {
        Quantity::Zero | Quantity::One | Quantity::Num(_) | Quantity::Var(_) => write_q(q, 0, out),
        _ => {
            out.push('(');
            write_q(q, 0, out);
            out.push(')');
        }
    }
}

fn write_set(set: &ActionSet, out: &mut String) {
    out.push('{');
    for (i, a) in set.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(a.name());
    }
    out.push('}');
}

fn write_t(t: &Tuplix, as_operand: bool, out: &mut String) {
    match t {
        Tuplix::Empty => out.push_str("eps"),
        Tuplix::Block => out.push_str("bot"),
        Tuplix::Transfer(a, q) => {
            out.push_str(a.name());
            out.push('(');
            write_q(q, 0, out);
            out.push(')');
        }
        Tuplix::ZeroTest(q) => {
            out.push_str("test(");
            write_q(q, 0, out);
            out.push(')');
        }
        Tuplix::Conj(a, b) => {
            if as_operand {
                out.push('(');
            }
            write_t(a, false, out);
            out.push_str(" & ");
            write_t(b, true, out);
            if as_operand {
                out.push(')');
            }
        }
        Tuplix::Delay(_) => {
            let mut n = 0u32;
            let mut cur = t;
            while let Tuplix::Delay(inner) = cur {
                n += 1;
                cur = inner;
            }
            out.push_str("delay");
            if n > 1 {
                out.push('^');
                out.push_str(&n.to_string());
            }
            out.push('(');
            write_t(cur, false, out);
            out.push(')');
        }
        Tuplix::PreAbstr(i, body) => {
            out.push_str("abs");
            write_set(i, out);
            out.push('(');
            write_t(body, false, out);
            out.push(')');
        }
        Tuplix::IntEncap(h, rate, body) => {
            out.push_str("enc");
            write_set(h, out);
            if *rate != Quantity::Zero {
                out.push('@');
                write_qatom(rate, out);
            }
            out.push('(');
            write_t(body, false, out);
            out.push(')');
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_quantity, parse_tuplix};

    fn round(src: &str) -> String {
        print_tuplix(&parse_tuplix(src).unwrap())
    }

    #[test]
    fn constants() {
        assert_eq!(print_tuplix(&Tuplix::Empty), "eps");
        assert_eq!(print_tuplix(&Tuplix::Block), "bot");
    }

    #[test]
    fn example_one_prints_back() {
        let src = "a(u) & delay(a(5)) & delay^2(b(u - 7))";
        assert_eq!(round(src), src);
    }

    #[test]
    fn sugar_is_restored() {
        assert_eq!(
            print_quantity(&parse_quantity("max(u, 0) + min(v,-w) - (1+p)^2/7").unwrap()),
            "max(u, 0) + min(v, -w) - (1 + p)^2/7"
        );
        assert_eq!(round("enc{b,a}@0(a(1))"), "enc{a,b}(a(1))");
        assert_eq!(round("enc{a}@(1/100)(a(1))"), "enc{a}@(1/100)(a(1))");
        assert_eq!(round("a(1) & (b(2) & c(3))"), "a(1) & (b(2) & c(3))");
        assert_eq!(round("delay(delay(delay(x(1))))"), "delay^3(x(1))");
        assert_eq!(print_quantity(&parse_quantity("-(u^2)").unwrap()), "-(u^2)");
        assert_eq!(print_quantity(&parse_quantity("(-u)^2").unwrap()), "-u^2");
        assert_eq!(
            print_quantity(&parse_quantity("u - (v - w)").unwrap()),
            "u - (v - w)"
        );
        assert_eq!(
            print_quantity(&parse_quantity("u/(v*w)").unwrap()),
            "u/(v*w)"
        );
    }

    #[test]
    fn reparse_is_identity_on_tricky_shapes() {
        for src in [
            "x^2^2",
            "u*u*v",
            "u*(u*u)",
            "inv(u)*inv(u)",
            "--u",
            "u - -v",
            "u + -max(-v, -w)",
            "2^3*(4 - 1)",
            "icap@p(a(1) & delay(b(-1)))",
            "icap@(icap@0(eps))(bot)",
            "sign(1 - u/u)",
        ] {
            let q = parse_quantity(src).unwrap();
            let printed = print_quantity(&q);
            assert_eq!(parse_quantity(&printed).unwrap(), q, "{src} -> {printed}");
        }
    }
}
