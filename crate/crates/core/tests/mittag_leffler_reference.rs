//! Mittag-Leffler values against a 60-digit mpmath reference
//! (`oracles/mittag_leffler_oracle.py`).

use zener_beam::fractional_kernel::{e_alpha, mittag_leffler, MlParams};

#[rustfmt::skip]
const TABLE: &[(f64, f64, f64, f64)] = &[
    (0.3, 1.0, 0.0, 1.0),
    (0.3, 1.0, -0.1, 0.89881153650272255297),
    (0.3, 1.0, -0.5, 0.63264900594359902138),
    (0.3, 1.0, -1.0, 0.45659440832969066901),
    (0.3, 1.0, -2.0, 0.29023222616787535326),
    (0.3, 1.0, -5.0, 0.13708086902027063758),
    (0.3, 1.0, -10.0, 0.072649729072772085356),
    (0.3, 1.0, -20.0, 0.037406226213884452596),
    (0.3, 1.0, -50.0, 0.015228201501814695036),
    (0.3, 1.0, 0.5, 2.0620157899559994849),
    (0.3, 1.0, 2.0, 79485.907625183497177),
    (0.3, 0.3, 0.0, 0.33427275256419055398),
    (0.3, 0.3, -0.1, 0.27549390039535823019),
    (0.3, 0.3, -0.5, 0.14375650014722127361),
    (0.3, 0.3, -1.0, 0.077316799030089675954),
    (0.3, 0.3, -2.0, 0.032062399218847496015),
    (0.3, 0.3, -5.0, 0.0072751008031549118806),
    (0.3, 0.3, -10.0, 0.0020517863032276150783),
    (0.3, 0.3, -20.0, 0.00054462489804465209259),
    (0.3, 0.3, -50.0, 0.000090297795269851065792),
    (0.3, 0.3, 0.5, 1.1694769581219357911),
    (0.3, 0.3, 2.0, 400586.4336688223654),
    (0.5, 1.0, 0.0, 1.0),
    (0.5, 1.0, -0.1, 0.89645697996912664193),
    (0.5, 1.0, -0.5, 0.61569034419292587487),
    (0.5, 1.0, -1.0, 0.42758357615580700441),
    (0.5, 1.0, -2.0, 0.25539567631050574387),
    (0.5, 1.0, -5.0, 0.11070463773306862637),
    (0.5, 1.0, -10.0, 0.056140992743822585858),
    (0.5, 1.0, -20.0, 0.028174348741051319319),
    (0.5, 1.0, -50.0, 0.0112815362653237725),
    (0.5, 1.0, 0.5, 1.9523604891825570933),
    (0.5, 1.0, 2.0, 108.94090438997797241),
    (0.5, 0.5, 0.0, 0.56418958354775628695),
    (0.5, 0.5, -0.1, 0.47454388555084362275),
    (0.5, 0.5, -0.5, 0.25634441145129334951),
    (0.5, 0.5, -1.0, 0.13660600739194928254),
    (0.5, 0.5, -2.0, 0.053398230926744799218),
    (0.5, 0.5, -5.0, 0.010666394882413155097),
    (0.5, 0.5, -10.0, 0.0027796561095304283729),
    (0.5, 0.5, -20.0, 0.0007026087267299005751),
    (0.5, 0.5, -50.0, 0.00011277028156766193889),
    (0.5, 0.5, 0.5, 1.5403698281390348336),
    (0.5, 0.5, 2.0, 218.44599836350370111),
    (0.7, 1.0, 0.0, 1.0),
    (0.7, 1.0, -0.1, 0.89756112693138677654),
    (0.7, 1.0, -0.5, 0.60514759205956427126),
    (0.7, 1.0, -1.0, 0.39961197811559938437),
    (0.7, 1.0, -2.0, 0.21378672701529726519),
    (0.7, 1.0, -5.0, 0.077569357764769801692),
    (0.7, 1.0, -10.0, 0.036173265542309153332),
    (0.7, 1.0, -20.0, 0.017395698291603977466),
    (0.7, 1.0, -50.0, 0.0067936656703830928422),
    (0.7, 1.0, 0.5, 1.8249850568512024534),
    (0.7, 1.0, 2.0, 20.966433131481951425),
    (0.7, 0.7, 0.0, 0.77038318386656599884),
    (0.7, 0.7, -0.1, 0.66666528870184916536),
    (0.7, 0.7, -0.5, 0.38661080082252713365),
    (0.7, 0.7, -1.0, 0.2103933463890237074),
    (0.7, 0.7, -2.0, 0.077358224338521227992),
    (0.7, 0.7, -5.0, 0.012201124167156127016),
    (0.7, 0.7, -10.0, 0.0027247024931022995986),
    (0.7, 0.7, -20.0, 0.00063299724600969778985),
    (0.7, 0.7, -50.0, 0.00009663624446241805701),
    (0.7, 0.7, 0.5, 1.6711092247431752666),
    (0.7, 0.7, 2.0, 28.40420422610448255),
    (0.9, 1.0, 0.0, 1.0),
    (0.9, 1.0, -0.1, 0.90175694244985940329),
    (0.9, 1.0, -0.5, 0.60340549869586096762),
    (0.9, 1.0, -1.0, 0.37606602142464188118),
    (0.9, 1.0, -2.0, 0.16352830001693004885),
    (0.9, 1.0, -5.0, 0.034431324804098423905),
    (0.9, 1.0, -10.0, 0.012820606051102102705),
    (0.9, 1.0, -20.0, 0.0057495078161091138828),
    (0.9, 1.0, -50.0, 0.0021753530768569765492),
    (0.9, 1.0, 0.5, 1.7043087220993991263),
    (0.9, 1.0, 2.0, 9.6049277845715013047),
    (0.9, 0.9, 0.0, 0.93577872091287277318),
    (0.9, 0.9, -0.1, 0.83462474715172490182),
    (0.9, 0.9, -0.5, 0.53190235156843732495),
    (0.9, 0.9, -1.0, 0.30814879777662194201),
    (0.9, 0.9, -2.0, 0.1105980242932084808),
    (0.9, 0.9, -5.0, 0.010212790452992133754),
    (0.9, 0.9, -10.0, 0.0014346523622941288355),
    (0.9, 0.9, -20.0, 0.00028402595741192644328),
    (0.9, 0.9, -50.0, 0.000040536249580922198912),
    (0.9, 0.9, 0.5, 1.6742480910659136781),
    (0.9, 0.9, 2.0, 10.415849710921112402),
    (1.0, 1.0, 0.0, 1.0),
    (1.0, 1.0, -0.1, 0.90483741803595957316),
    (1.0, 1.0, -0.5, 0.6065306597126334236),
    (1.0, 1.0, -1.0, 0.3678794411714423216),
    (1.0, 1.0, -2.0, 0.13533528323661269189),
    (1.0, 1.0, -5.0, 0.0067379469990854670966),
    (1.0, 1.0, -10.0, 0.000045399929762484851536),
    (1.0, 1.0, -20.0, 2.061153622438557828e-9),
    (1.0, 1.0, -50.0, 1.928749847963917783e-22),
    (1.0, 1.0, 0.5, 1.6487212707001281468),
    (1.0, 1.0, 2.0, 7.3890560989306502272),
];

#[test]
fn matches_high_precision_reference() {
    let mut worst: f64 = 0.0;
    for &(alpha, beta, z, expected) in TABLE {
        let got = mittag_leffler(MlParams::new(alpha, beta).unwrap(), z).unwrap();
        let rel = ((got - expected) / expected).abs();
        worst = worst.max(rel);
        assert!(rel < 1e-10, "E_({alpha},{beta})({z}) = {got}, expected {expected}");
    }
    assert!(worst < 1e-10);
}

#[test]
fn relaxation_function_at_half_order() {
    // e_{1/2}(1, 2) = E_{1/2}(−2) = e⁴ erfc(2)
    let v = e_alpha(1.0, 2.0, 0.5).unwrap();
    assert!((v - 0.255_395_676_310_505_743_87).abs() < 1e-12);
}
