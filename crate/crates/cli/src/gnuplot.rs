//! Companion gnuplot scripts for the CSV outputs. The CSVs stay the source
//! of truth; these are convenience viewers with no plotting dependency.

pub fn errorbars_script(csv_path: &str, sizes: &[usize]) -> String {
    let mut plot_lines: Vec<String> = Vec::new();
    for &n in sizes {
        plot_lines.push(format!(
            "  '{csv_path}' using (strcol(1) eq 'cell' && column(3) == {n} ? column(4) : NaN):5:6 \\\n    with yerrorbars title 'n = {n}'"
        ));
    }
    format!(
        "set datafile separator ','\n\
         set key top left\n\
         set xlabel 'beta'\n\
         set ylabel 'estimate (mean and sd over interior replicates)'\n\
         plot \\\n{}\n",
        plot_lines.join(", \\\n")
    )
}

pub fn cw_power_script(csv_path: &str) -> String {
    format!(
        "set datafile separator ','\n\
         set key bottom right\n\
         set xlabel 'beta'\n\
         set ylabel 'rejection rate'\n\
         set yrange [0:1.05]\n\
         plot '{csv_path}' using 1:2 with points pt 7 title 'empirical', \\\n  \
         '{csv_path}' using 1:3 with lines lw 2 title 'limit'\n"
    )
}

pub fn heatmap_script(csv_path: &str) -> String {
    format!(
        "set datafile separator ','\n\
         set xlabel 'p'\n\
         set ylabel 'beta'\n\
         set cblabel 'power'\n\
         set cbrange [0:1]\n\
         plot '{csv_path}' using 1:2:3 with points pt 5 ps 3 palette notitle\n"
    )
}

pub fn partition_script(csv_path: &str) -> String {
    format!(
        "set datafile separator ','\n\
         set key top left\n\
         set xlabel 'beta'\n\
         set ylabel 'log-partition value'\n\
         plot '{csv_path}' using 1:2 with linespoints title 'exact', \\\n  \
         '{csv_path}' using 1:3 with lines title 'gaussian upper', \\\n  \
         '{csv_path}' using 1:4 with lines title 'rademacher lower', \\\n  \
         '{csv_path}' using 1:5 with lines title 'mean-field lower'\n"
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scripts_reference_the_csv() {
        for script in [
            errorbars_script("runs/a.csv", &[200, 800]),
            cw_power_script("runs/a.csv"),
            heatmap_script("runs/a.csv"),
            partition_script("runs/a.csv"),
        ] {
            assert!(script.contains("runs/a.csv"));
            assert!(script.contains("set datafile separator ','"));
        }
        assert!(errorbars_script("x.csv", &[200, 800]).contains("n = 800"));
    }
}
