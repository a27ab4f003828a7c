"""Data points read off the published trade-off plots (plain decimal strings)."""

# key: (figure, panel, curve); value: ((M, R), ...)
FIGURE_DATA = {
    ('fig2', 'worst', 'ji_worst'): (
        ('1', '9'),
        ('1.33333333333333', '6.5'),
        ('1.66666666666667', '5'),
        ('2', '4'),
        ('2.33333333333333', '3.28571428571429'),
        ('2.66666666666667', '2.75'),
        ('3', '2.33333333333333'),
        ('3.33333333333333', '2'),
        ('3.66666666666667', '1.72727272727273'),
        ('4', '1.5'),
        ('4.33333333333333', '1.30769230769231'),
        ('4.66666666666667', '1.14285714285714'),
        ('5', '1'),
        ('5.33333333333333', '0.875'),
        ('5.66666666666667', '0.764705882352941'),
        ('6', '0.666666666666667'),
    ),
    ('fig2', 'worst', 'proposed_worst'): (
        ('1', '6.61330049261083'),
        ('1.33333333333333', '5.4392446633826'),
        ('1.66666666666667', '4.51042061386889'),
        ('2', '3.77152961980548'),
        ('2.33333333333333', '3.17963875205254'),
        ('2.66666666666667', '2.70157421289355'),
        ('3', '2.31181076128602'),
        ('3.33333333333333', '1.99077604055115'),
        ('3.66666666666667', '1.72349928931638'),
        ('4', '1.49854358535018'),
        ('4.33333333333333', '1.30716949217699'),
        ('4.66666666666667', '1.14268579995716'),
        ('5', '0.999950024987506'),
        ('5.33333333333333', '0.874987506246877'),
        ('5.66666666666667', '0.764703362604412'),
        ('6', '0.666666300549359'),
    ),
    ('fig2', 'worst', 'shared_link_worst'): (
        ('1', '5.55665024630542'),
        ('1.33333333333333', '4.63426382047072'),
        ('1.66666666666667', '3.89467811881605'),
        ('2', '3.29801692560313'),
        ('2.33333333333333', '2.81312260536398'),
        ('2.66666666666667', '2.4157476817147'),
        ('3', '2.08708645677161'),
        ('3.33333333333333', '1.81259153972797'),
        ('3.66666666666667', '1.58102734347112'),
        ('4', '1.38371912944627'),
        ('4.33333333333333', '1.21396206658575'),
        ('4.66666666666667', '1.06656005330668'),
        ('5', '0.937468765617191'),
        ('5.33333333333333', '0.82352157254706'),
        ('5.66666666666667', '0.722220635713889'),
        ('6', '0.631578716136437'),
    ),
    ('fig2', 'worst', 'sengupta_converse'): (
        ('1', '3.23076923076923'),
        ('1.33333333333333', '2.46153846153846'),
        ('1.66666666666667', '1.88888888888889'),
        ('2', '1.42857142857143'),
        ('2.33333333333333', '1.25'),
        ('2.66666666666667', '1.07142857142857'),
        ('3', '0.931034482758621'),
        ('3.33333333333333', '0.862068965517241'),
        ('3.66666666666667', '0.793103448275862'),
        ('4', '0.724137931034483'),
        ('4.33333333333333', '0.655172413793104'),
        ('4.66666666666667', '0.586206896551724'),
        ('5', '0.517241379310345'),
        ('5.33333333333333', '0.482758620689655'),
        ('5.66666666666667', '0.448275862068966'),
        ('6', '0.413793103448276'),
    ),
    ('fig2', 'worst', 'cutset_converse'): (
        ('1', '2.5'),
        ('1.33333333333333', '1.66666666666667'),
        ('1.66666666666667', '1.33333333333333'),
        ('2', '1.2'),
        ('2.33333333333333', '1.06666666666667'),
        ('2.66666666666667', '0.933333333333333'),
        ('3', '0.8'),
        ('3.33333333333333', '0.689655172413793'),
        ('3.66666666666667', '0.655172413793103'),
        ('4', '0.620689655172414'),
        ('4.33333333333333', '0.586206896551724'),
        ('4.66666666666667', '0.551724137931034'),
        ('5', '0.517241379310345'),
        ('5.33333333333333', '0.482758620689655'),
        ('5.66666666666667', '0.448275862068966'),
        ('6', '0.413793103448276'),
    ),
    ('fig2', 'average', 'ji_average'): (
        ('1', '8.94833333333333'),
        ('1.33333333333333', '6.5'),
        ('1.66666666666667', '5'),
        ('2', '4'),
        ('2.33333333333333', '3.28571428571434'),
        ('2.66666666666667', '2.75'),
        ('3', '2.33333333333324'),
        ('3.33333333333333', '2'),
        ('3.66666666666667', '1.7272727272727'),
        ('4', '1.5'),
        ('4.33333333333333', '1.30769230769236'),
        ('4.66666666666667', '1.14285714285721'),
        ('5', '1'),
        ('5.33333333333333', '0.875'),
        ('5.66666666666667', '0.764705882352953'),
        ('6', '0.666666666666696'),
    ),
    ('fig2', 'average', 'proposed_average'): (
        ('1', '6.42173133552269'),
        ('1.33333333333333', '5.31030857203674'),
        ('1.66666666666667', '4.43279480676838'),
        ('2', '3.72209820779477'),
        ('2.33333333333333', '3.15102199830181'),
        ('2.66666666666667', '2.68461619207494'),
        ('3', '2.30275774538533'),
        ('3.33333333333333', '1.9860251287898'),
        ('3.66666666666667', '1.72106506778357'),
        ('4', '1.49732548868421'),
        ('4.33333333333333', '1.30655984599479'),
        ('4.66666666666667', '1.14243821930303'),
        ('5', '0.999847224720976'),
        ('5.33333333333333', '0.874951130545828'),
        ('5.66666666666667', '0.764692374765'),
        ('6', '0.666663124335249'),
    ),
    ('fig2', 'average', 'shared_link_average'): (
        ('1', '5.42853932676539'),
        ('1.33333333333333', '4.55870984613531'),
        ('1.66666666666667', '3.84613029626796'),
        ('2', '3.26944888046825'),
        ('2.33333333333333', '2.79666305973081'),
        ('2.66666666666667', '2.4057619808897'),
        ('3', '2.08174532197782'),
        ('3.33333333333333', '1.80962515163777'),
        ('3.66666666666667', '1.5795452581646'),
        ('4', '1.38297949735749'),
        ('4.33333333333333', '1.21362656079371'),
        ('4.66666666666667', '1.06642585373974'),
        ('5', '0.937407263035159'),
        ('5.33333333333333', '0.823500814037418'),
        ('5.66666666666667', '0.722213902731163'),
        ('6', '0.631576517601961'),
    ),
    ('fig3', 'worst', 'ji_worst@a=32'): (
        ('1.46363098758136', '71.7179183914867'),
        ('2.18510888758092', '47.1012360211887'),
        ('2.89982425307554', '34.7978910369064'),
        ('3.60787172011657', '27.4198250728859'),
        ('4.3093441671504', '22.5043528728965'),
        ('5.00433275563232', '18.9960386234206'),
        ('5.69292696952265', '16.3671650373776'),
        ('6.37521465369205', '14.3245563823698'),
        ('7.05128205128178', '12.6923076923072'),
        ('7.72121384004555', '11.3584798638687'),
        ('8.38509316770202', '10.2484472049691'),
        ('9.04300168634053', '9.31054611493049'),
        ('9.69501958589833', '8.5078743304822'),
        ('10.3412256267406', '7.81337047353738'),
        ('10.9816971713811', '7.20673876871882'),
        ('11.6165102153506', '6.67245915483804'),
        ('12.245739417262', '6.19846069268816'),
        ('12.8694581280784', '5.77521389681079'),
        ('13.4877384196186', '5.39509536784744'),
        ('14.100651112317', '5.0519339586079'),
        ('14.708265802269', '4.74068071312801'),
        ('15.3106508875737', '4.45716490866985'),
        ('15.9078735940017', '4.197911087306'),
        ('16.4999999999999', '3.95999999999998'),
        ('17.0870950610732', '3.74096164058999'),
        ('17.6692226335269', '3.53869205006164'),
        ('18.2464454976305', '3.35138794854437'),
        ('18.8188253801785', '3.17749489177806'),
        ('19.3864229765014', '3.01566579634466'),
    ),
    ('fig3', 'worst', 'proposed_worst@a=32'): (
        ('1.46363098758136', '54.3317563571868'),
        ('2.18510888758092', '41.5685697469096'),
        ('2.89982425307554', '32.8393093327048'),
        ('3.60787172011657', '26.688783024255'),
        ('4.3093441671504', '22.2235063639022'),
        ('5.00433275563232', '18.8864284028326'),
        ('5.69292696952265', '16.3240505792164'),
        ('6.37521465369205', '14.3075554352531'),
        ('7.05128205128178', '12.6856127011293'),
        ('7.72121384004555', '11.355854410978'),
        ('8.38509316770202', '10.2474242818124'),
        ('9.04300168634053', '9.31015089160421'),
        ('9.69501958589833', '8.50772315111286'),
        ('10.3412256267406', '7.8133133047476'),
        ('10.9816971713811', '7.20671742554543'),
        ('11.6165102153506', '6.67245129810523'),
        ('12.245739417262', '6.19845784445173'),
        ('12.8694581280784', '5.77521288117748'),
        ('13.4877384196186', '5.39509501205292'),
        ('14.100651112317', '5.05193383630727'),
        ('14.708265802269', '4.74068067193011'),
        ('15.3106508875737', '4.45716489508778'),
        ('15.9078735940017', '4.19791108292977'),
        ('16.4999999999999', '3.95999999862391'),
        ('17.0870950610732', '3.74096164016838'),
        ('17.6692226335269', '3.53869204993598'),
        ('18.2464454976305', '3.35138794850801'),
        ('18.8188253801785', '3.17749489176786'),
        ('19.3864229765014', '3.0156657963419'),
    ),
    ('fig3', 'worst', 'ji_worst@a=24'): (
        ('1.31160572337047', '64.2686804451532'),
        ('1.96117274167986', '42.2741679873215'),
        ('2.60663507109002', '31.2796208530802'),
        ('3.24803149606295', '24.6850393700784'),
        ('3.88540031397182', '20.2904238618528'),
        ('4.51877934272277', '17.1529175050293'),
        ('5.14820592823707', '14.8010920436816'),
        ('5.7737169517885', '12.9730430274754'),
        ('6.39534883720906', '11.5116279069763'),
        ('7.01313755795998', '10.3168469860899'),
        ('7.62711864406794', '9.32203389830526'),
        ('8.23732718894', '8.48103509393823'),
        ('8.84379785604916', '7.76088383285947'),
        ('9.4465648854959', '7.13740458015246'),
        ('10.0456621004566', '6.59246575342468'),
        ('10.6411229135052', '6.1122020887262'),
        ('11.2329803328288', '5.68582955118496'),
        ('11.8212669683254', '5.30483448440086'),
        ('12.4060150375941', '4.96240601503762'),
        ('12.9872563718142', '4.65303062754341'),
        ('13.5650224215246', '4.37219730941702'),
        ('14.1393442622949', '4.11617961511041'),
        ('14.7102526002977', '3.88187221396746'),
        ('15.2777777777777', '3.66666666666666'),
        ('15.8419497784347', '3.46835586865138'),
        ('16.4027982326949', '3.28505972835865'),
        ('16.9603524229076', '3.11516677155446'),
        ('17.5146412884336', '2.95728782753575'),
        ('18.065693430657', '2.8102189781022'),
    ),
    ('fig3', 'worst', 'proposed_worst@a=24'): (
        ('1.31160572337047', '48.6883942766311'),
        ('1.96117274167986', '37.3085050184889'),
        ('2.60663507109002', '29.5190632074392'),
        ('3.24803149606295', '24.0269096517571'),
        ('3.88540031397182', '20.0372064181075'),
        ('4.51877934272277', '17.0539423919162'),
        ('5.14820592823707', '14.7621029418915'),
        ('5.7737169517885', '12.9576461095838'),
        ('6.39534883720906', '11.5055557056754'),
        ('7.01313755795998', '10.3144623011614'),
        ('7.62711864406794', '9.32110344277851'),
        ('8.23732718894', '8.48067508252119'),
        ('8.84379785604916', '7.76074592702332'),
        ('9.4465648854959', '7.13735235726307'),
        ('10.0456621004566', '6.59244622945632'),
        ('10.6411229135052', '6.11219489168871'),
        ('11.2329803328288', '5.68582693850615'),
        ('11.8212669683254', '5.30483355148882'),
        ('12.4060150375941', '4.962405687778'),
        ('12.9872563718142', '4.6530305148997'),
        ('13.5650224215246', '4.37219727142134'),
        ('14.1393442622949', '4.1161796025674'),
        ('14.7102526002977', '3.88187220992069'),
        ('15.2777777777777', '3.66666666539251'),
        ('15.8419497784347', '3.46835586826049'),
        ('16.4027982326949', '3.285059728242'),
        ('16.9603524229076', '3.11516677152066'),
        ('17.5146412884336', '2.95728782752626'),
        ('18.065693430657', '2.81021897809963'),
    ),
    ('fig3', 'worst', 'ji_worst@a=0'): (
        ('1.00000000000003', '49.0000000000016'),
        ('1.49999999999999', '32.3333333333332'),
        ('1.99999999999998', '23.9999999999997'),
        ('2.49999999999996', '18.9999999999997'),
        ('3.00000000000006', '15.666666666667'),
        ('3.49999999999981', '13.2857142857136'),
        ('3.99999999999995', '11.4999999999999'),
        ('4.50000000000001', '10.1111111111111'),
        ('4.99999999999982', '8.99999999999967'),
        ('5.50000000000013', '8.09090909090928'),
        ('6.00000000000012', '7.33333333333348'),
        ('6.49999999999994', '6.69230769230763'),
        ('7.00000000000013', '6.14285714285726'),
        ('7.49999999999977', '5.66666666666649'),
        ('8.00000000000003', '5.25000000000002'),
        ('8.49999999999996', '4.88235294117645'),
        ('8.99999999999981', '4.55555555555546'),
        ('9.49999999999968', '4.2631578947367'),
        ('10.0000000000001', '4.00000000000003'),
        ('10.5000000000001', '3.76190476190479'),
        ('11', '3.54545454545454'),
        ('11.4999999999998', '3.34782608695647'),
        ('12.0000000000005', '3.16666666666679'),
        ('12.5', '3'),
        ('13.0000000000003', '2.84615384615392'),
        ('13.4999999999999', '2.70370370370368'),
        ('14.0000000000001', '2.5714285714286'),
        ('14.5000000000002', '2.448275862069'),
        ('15.0000000000001', '2.33333333333335'),
    ),
    ('fig3', 'worst', 'proposed_worst@a=0'): (
        ('1.00000000000003', '37.1212121212133'),
        ('1.49999999999999', '28.5353535353533'),
        ('1.99999999999998', '22.6491721337079'),
        ('2.49999999999996', '18.4934395501403'),
        ('3.00000000000006', '15.4711521070721'),
        ('3.49999999999981', '13.2090535617387'),
        ('3.99999999999995', '11.4697066493969'),
        ('4.50000000000001', '10.0991108466211'),
        ('4.99999999999982', '8.99525264261898'),
        ('5.50000000000013', '8.08903891981992'),
        ('6.00000000000012', '7.33260137498577'),
        ('6.49999999999994', '6.69202361057128'),
        ('7.00000000000013', '6.14274798829847'),
        ('7.49999999999977', '5.66662520485734'),
        ('8.00000000000003', '5.24998445182159'),
        ('8.49999999999996', '4.88234719227013'),
        ('8.99999999999981', '4.55555346224553'),
        ('9.49999999999968', '4.26315714501466'),
        ('10.0000000000001', '3.99999973620894'),
        ('10.5000000000001', '3.76190467083406'),
        ('11', '3.5454545146435'),
        ('11.4999999999998', '3.34782607675482'),
        ('12.0000000000005', '3.16666666336561'),
        ('12.5', '2.99999999895752'),
        ('13.0000000000003', '2.84615384583316'),
        ('13.4999999999999', '2.70370370360767'),
        ('14.0000000000001', '2.5714285714007'),
        ('14.5000000000002', '2.44827586206114'),
        ('15.0000000000001', '2.33333333333121'),
    ),
    ('fig3', 'average', 'ji_average@a=32'): (
        ('1.46363098758136', '63.4496717918412'),
        ('2.18510888758092', '47.1012360212085'),
        ('2.89982425307554', '34.7978910369064'),
        ('3.60787172011657', '27.4198250728859'),
        ('4.3093441671504', '22.5043528729057'),
        ('5.00433275563232', '18.9960386234302'),
        ('5.69292696952265', '16.3671650373776'),
        ('6.37521465369205', '14.3245563823793'),
        ('7.05128205128178', '12.6923076923072'),
        ('7.72121384004555', '11.3584798638718'),
        ('8.38509316770202', '10.248447204973'),
        ('9.04300168634053', '9.31054611493419'),
        ('9.69501958589833', '8.50787433048583'),
        ('10.3412256267406', '7.81337047353638'),
        ('10.9816971713811', '7.20673876871882'),
        ('11.6165102153506', '6.67245915483598'),
        ('12.245739417262', '6.19846069269229'),
        ('12.8694581280784', '5.77521389680939'),
        ('13.4877384196186', '5.39509536784744'),
        ('14.100651112317', '5.05193395861114'),
        ('14.708265802269', '4.74068071312948'),
        ('15.3106508875737', '4.45716490867256'),
        ('15.9078735940017', '4.19791108730711'),
        ('16.4999999999999', '3.95999999999998'),
        ('17.0870950610732', '3.74096164059152'),
        ('17.6692226335269', '3.53869205006141'),
        ('18.2464454976305', '3.35138794854483'),
        ('18.8188253801785', '3.17749489178052'),
        ('19.3864229765014', '3.01566579634544'),
    ),
    ('fig3', 'average', 'proposed_average@a=32'): (
        ('1.46363098758136', '49.1150103636857'),
        ('2.18510888758092', '38.8496334915879'),
        ('2.89982425307554', '31.425059982889'),
        ('3.60787172011657', '25.9696059551026'),
        ('4.3093441671504', '21.8542048776329'),
        ('5.00433275563232', '18.6999361323242'),
        ('5.69292696952265', '16.2302559947271'),
        ('6.37521465369205', '14.2609108400198'),
        ('7.05128205128178', '12.6624551010769'),
        ('7.72121384004555', '11.3445946108466'),
        ('8.38509316770202', '10.2419242322634'),
        ('9.04300168634053', '9.30749029532806'),
        ('9.69501958589833', '8.50644868649798'),
        ('10.3412256267406', '7.81271296426228'),
        ('10.9816971713811', '7.20643721197461'),
        ('11.6165102153506', '6.67232018187293'),
        ('12.245739417262', '6.19839677342921'),
        ('12.8694581280784', '5.77518498497825'),
        ('13.4877384196186', '5.3950824164691'),
        ('14.100651112317', '5.05192825038613'),
        ('14.708265802269', '4.74067814352274'),
        ('15.3106508875737', '4.45716379064739'),
        ('15.9078735940017', '4.19791060511915'),
        ('16.4999999999999', '3.9599997958292'),
        ('17.0870950610732', '3.74096155232262'),
        ('17.6692226335269', '3.53869201383501'),
        ('18.2464454976305', '3.35138793342042'),
        ('18.8188253801785', '3.1774948854584'),
        ('19.3864229765014', '3.01566579390624'),
    ),
    ('fig3', 'average', 'ji_average@a=24'): (
        ('1.31160572337047', '56.8592448330702'),
        ('1.96117274167986', '42.2741679873393'),
        ('2.60663507109002', '31.2796208530802'),
        ('3.24803149606295', '24.6850393700784'),
        ('3.88540031397182', '20.2904238618611'),
        ('4.51877934272277', '17.1529175050379'),
        ('5.14820592823707', '14.8010920436816'),
        ('5.7737169517885', '12.973043027484'),
        ('6.39534883720906', '11.5116279069763'),
        ('7.01313755795998', '10.3168469860927'),
        ('7.62711864406794', '9.32203389830878'),
        ('8.23732718894', '8.4810350939416'),
        ('8.84379785604916', '7.76088383286277'),
        ('9.4465648854959', '7.13740458015155'),
        ('10.0456621004566', '6.59246575342468'),
        ('10.6411229135052', '6.11220208872431'),
        ('11.2329803328288', '5.68582955118874'),
        ('11.8212669683254', '5.30483448439958'),
        ('12.4060150375941', '4.96240601503762'),
        ('12.9872563718142', '4.65303062754639'),
        ('13.5650224215246', '4.37219730941837'),
        ('14.1393442622949', '4.11617961511291'),
        ('14.7102526002977', '3.88187221396849'),
        ('15.2777777777777', '3.66666666666666'),
        ('15.8419497784347', '3.4683558686528'),
        ('16.4027982326949', '3.28505972835844'),
        ('16.9603524229076', '3.11516677155489'),
        ('17.5146412884336', '2.95728782753804'),
        ('18.065693430657', '2.81021897810293'),
    ),
    ('fig3', 'average', 'proposed_average@a=24'): (
        ('1.31160572337047', '44.0135042527782'),
        ('1.96117274167986', '34.8682130492382'),
        ('2.60663507109002', '28.2478027334342'),
        ('3.24803149606295', '23.3794615291344'),
        ('3.88540031397182', '19.7042360042708'),
        ('4.51877934272277', '16.8855448331003'),
        ('5.14820592823707', '14.6772829822311'),
        ('5.7737169517885', '12.915402404103'),
        ('6.39534883720906', '11.4845523009767'),
        ('7.01313755795998', '10.3042350844526'),
        ('7.62711864406794', '9.31610057284978'),
        ('8.23732718894', '8.47825152861681'),
        ('8.84379785604916', '7.75958336027152'),
        ('9.4465648854959', '7.13680395463145'),
        ('10.0456621004566', '6.59218990014725'),
        ('10.6411229135052', '6.11207478471011'),
        ('11.2329803328288', '5.6857709182389'),
        ('11.8212669683254', '5.30480792737821'),
        ('12.4060150375941', '4.96239410236632'),
        ('12.9872563718142', '4.6530253700458'),
        ('13.5650224215246', '4.3721949395419'),
        ('14.1393442622949', '4.11617858261972'),
        ('14.7102526002977', '3.88187176808195'),
        ('15.2777777777777', '3.66666647761963'),
        ('15.8419497784347', '3.4683557868161'),
        ('16.4027982326949', '3.28505969472853'),
        ('16.9603524229076', '3.11516675749651'),
        ('17.5146412884336', '2.95728782165407'),
        ('18.065693430657', '2.81021897582991'),
    ),
    ('fig3', 'average', 'ji_average@a=0'): (
        ('1.00000000000003', '43.3508666666681'),
        ('1.49999999999999', '32.3333333333468'),
        ('1.99999999999998', '23.9999999999997'),
        ('2.49999999999996', '18.9999999999997'),
        ('3.00000000000006', '15.6666666666734'),
        ('3.49999999999981', '13.2857142857203'),
        ('3.99999999999995', '11.4999999999999'),
        ('4.50000000000001', '10.1111111111179'),
        ('4.99999999999982', '8.99999999999967'),
        ('5.50000000000013', '8.09090909091153'),
        ('6.00000000000012', '7.33333333333625'),
        ('6.49999999999994', '6.69230769231029'),
        ('7.00000000000013', '6.14285714285988'),
        ('7.49999999999977', '5.66666666666577'),
        ('8.00000000000003', '5.25000000000002'),
        ('8.49999999999996', '4.88235294117494'),
        ('8.99999999999981', '4.55555555555849'),
        ('9.49999999999968', '4.26315789473567'),
        ('10.0000000000001', '4.00000000000003'),
        ('10.5000000000001', '3.76190476190721'),
        ('11', '3.54545454545564'),
        ('11.4999999999998', '3.3478260869585'),
        ('12.0000000000005', '3.16666666666763'),
        ('12.5', '3'),
        ('13.0000000000003', '2.84615384615509'),
        ('13.4999999999999', '2.70370370370351'),
        ('14.0000000000001', '2.57142857142894'),
        ('14.5000000000002', '2.44827586207089'),
        ('15.0000000000001', '2.33333333333395'),
    ),
    ('fig3', 'average', 'proposed_average@a=0'): (
        ('1.00000000000003', '33.5569626363606'),
        ('1.49999999999999', '26.668899920084'),
        ('1.99999999999998', '21.673768642744'),
        ('2.49999999999996', '17.9951006921216'),
        ('3.00000000000006', '15.21405858754'),
        ('3.49999999999981', '13.0786219980013'),
        ('3.99999999999995', '11.4038041110426'),
        ('4.50000000000001', '10.0661863585918'),
        ('4.99999999999982', '8.97883179894546'),
        ('5.50000000000013', '8.08101830259495'),
        ('6.00000000000012', '7.32866578397517'),
        ('6.49999999999994', '6.69011120621764'),
        ('7.00000000000013', '6.14182779909976'),
        ('7.49999999999977', '5.66618980640435'),
        ('8.00000000000003', '5.24978032048091'),
        ('8.49999999999996', '4.88225125227147'),
        ('8.99999999999981', '4.55550857812838'),
        ('9.49999999999968', '4.26313655254759'),
        ('10.0000000000001', '3.99999039766498'),
        ('10.5000000000001', '3.76190051129764'),
        ('11', '3.54545262370126'),
        ('11.4999999999998', '3.34782524719738'),
        ('12.0000000000005', '3.1666663029323'),
        ('12.5', '2.99999984532517'),
        ('13.0000000000003', '2.8461537789994'),
        ('13.4999999999999', '2.70370367602507'),
        ('14.0000000000001', '2.5714285598244'),
        ('14.5000000000002', '2.44827585719967'),
        ('15.0000000000001', '2.33333333144665'),
    ),
}

# outage values printed in the legend, two significant figures
LEGEND_OUTAGE = {32: "3.2e-10", 24: "1.3e-5"}
