/// Compactly supported smoothing kernels on `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Kernel {
    /// `0.75 (1 - u^2)`
    #[default]
    Epanechnikov,
    /// `0.5`
    Uniform,
    /// `1 - |u|`
    Triangular,
}

impl Kernel {
    /// `K(u)`, zero outside `[-1, 1]`.
    #[inline]
    pub fn eval(self, u: f64) -> f64 {
        if !(-1.0..=1.0).contains(&u) {
            return 0.0;
        }
        match self {
            Kernel::Epanechnikov => 0.75 * (1.0 - u * u),
            Kernel::Uniform => 0.5,
            Kernel::Triangular => 1.0 - u.abs(),
        }
    }

    /// `K_h(d) = K(d / h) / h`.
    #[inline]
    pub fn scaled(self, d: f64, h: f64) -> f64 {
        self.eval(d / h) / h
    }

    pub fn name(self) -> &'static str {
        match self {
            Kernel::Epanechnikov => "epanechnikov",
            Kernel::Uniform => "uniform",
            Kernel::Triangular => "triangular",
        }
    }
}

impl std::str::FromStr for Kernel {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "epanechnikov" => Ok(Kernel::Epanechnikov),
            "uniform" => Ok(Kernel::Uniform),
            "triangular" => Ok(Kernel::Triangular),
            other => Err(crate::Error::InvalidArgument(format!("unknown kernel {other:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ALL: [Kernel; 3] = [Kernel::Epanechnikov, Kernel::Uniform, Kernel::Triangular];

    #[test]
    fn epanechnikov_values() {
        assert_eq!(Kernel::Epanechnikov.eval(0.0), 0.75);
        assert_eq!(Kernel::Epanechnikov.eval(1.0), 0.0);
        assert_eq!(Kernel::Epanechnikov.eval(-0.5), 0.5625);
        assert_eq!(Kernel::Epanechnikov.eval(1.01), 0.0);
    }

    #[test]
    fn kernels_are_symmetric_densities() {
        // Simpson's rule is exact for these piecewise polynomials of degree <= 2
        // when the kink at 0 is a node.
        let m = 2000;
        for k in ALL {
            let step = 2.0 / m as f64;
            let mut total = 0.0;
            for s in 0..m / 2 {
                let a = -1.0 + 2.0 * s as f64 * step;
                total += step / 3.0 * (k.eval(a) + 4.0 * k.eval(a + step) + k.eval(a + 2.0 * step));
            }
            assert!((total - 1.0).abs() < 1e-12, "{k:?} integrates to {total}");
            for u in [0.1, 0.37, 0.9] {
                assert_eq!(k.eval(u), k.eval(-u));
                assert!(k.eval(u) >= 0.0);
            }
        }
    }

    #[test]
    fn parse_names() {
        for k in ALL {
            assert_eq!(k.name().parse::<Kernel>().unwrap(), k);
        }
    }
}
